#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "nacest/tree.hpp"

namespace nacest {

// Rooted Newick. Branch lengths are accepted and dropped, bracket comments are
// skipped, numeric internal-node labels become annotations. Throws DataError.
RootedTree parse_newick(std::string_view text);

std::string write_newick(const RootedTree& tree, bool with_annotations = false);

// Quotes a label when it contains Newick punctuation or whitespace.
std::string quote_label(std::string_view label);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

// {"label": ...} for leaves, {"children": [...], "annotation": ...} otherwise.
nlohmann::json tree_to_json(const RootedTree& tree);
RootedTree tree_from_json(const nlohmann::json& value);

}  // namespace nacest
