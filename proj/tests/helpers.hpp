// Shared fixtures for the unit tests: a small catalog with two attribute
// groups and the knowledge table the mock backend answers from.

#pragma once

#include <string>
#include <vector>

#include "llmrg/domain.hpp"
#include "llmrg/mock_oracle.hpp"

namespace llmrg::testfix {

inline Catalog small_catalog() {
    Catalog catalog;
    catalog.add({"m1", "star voyager", {"sci-fi"}});
    catalog.add({"m2", "nebula dawn", {"sci-fi"}});
    catalog.add({"m3", "iron orbit", {"sci-fi"}});
    catalog.add({"m4", "quiet rivers", {"drama"}});
    catalog.add({"m5", "winter letters", {"drama"}});
    catalog.add({"m6", "the last harbor", {"drama"}});
    return catalog;
}

inline KnowledgeTable small_table() {
    KnowledgeTable table;
    table["sci-fi"] = {{"drawn to sci-fi", "a taste for sci-fi"},
                       {"star voyager", "nebula dawn", "iron orbit"}};
    table["drama"] = {{"drawn to drama", "a taste for drama"},
                      {"quiet rivers", "winter letters", "the last harbor"}};
    return table;
}

inline ReasoningChain simple_chain(std::int64_t id, const std::string& attr,
                                   const std::string& concept_label,
                                   const std::string& title, const std::string& item_id) {
    ReasoningChain chain;
    chain.id = id;
    chain.nodes = {{NodeKind::Attribute, attr, ""},
                   {NodeKind::Concept, concept_label, ""},
                   {NodeKind::Item, title, item_id}};
    chain.relations = {"leads to", "leads to"};
    chain.target_item = item_id;
    return chain;
}

}  // namespace llmrg::testfix
