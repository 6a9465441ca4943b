#include "nacest/newick.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>

#include "nacest/errors.hpp"

namespace nacest {

namespace {

constexpr std::string_view kSpecial = "()[]':;,";

bool is_plain_char(char c) {
  return kSpecial.find(c) == std::string_view::npos &&
         !std::isspace(static_cast<unsigned char>(c));
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return std::nullopt;
  return value;
}

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  RootedTree parse() {
    const int root = subtree();
    skip();
    if (!consume(';')) fail("expected ';'");
    skip();
    if (pos_ != text_.size()) fail("trailing characters after ';'");
    try {
      return builder_.build(root);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("invalid Newick tree: ") + e.what());
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("Newick parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        const auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  bool consume(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string label() {
    skip();
    std::string out;
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated quoted label");
        const char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            out += '\'';
            ++pos_;
          } else {
            break;
          }
        } else {
          out += c;
        }
      }
      return out;
    }
    while (pos_ < text_.size() && is_plain_char(text_[pos_])) out += text_[pos_++];
    return out;
  }

  void branch_length() {
    if (!consume(':')) return;
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_plain_char(text_[pos_])) ++pos_;
    if (!parse_number(std::string(text_.substr(start, pos_ - start))))
      fail("invalid branch length");
  }

  int subtree() {
    if (consume('(')) {
      std::vector<int> kids;
      do {
        kids.push_back(subtree());
      } while (consume(','));
      if (!consume(')')) fail("expected ')' or ','");
      const std::string name = label();
      branch_length();
      return builder_.internal(std::move(kids), parse_number(name));
    }
    std::string name = label();
    if (name.empty()) fail("empty leaf label");
    branch_length();
    return builder_.leaf(std::move(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  TreeBuilder builder_;
};

void write_subtree(const RootedTree& tree, int id, bool with_annotations, std::string& out) {
  if (tree.is_leaf(id)) {
    out += quote_label(tree.node(id).label);
    return;
  }
  out += '(';
  bool first = true;
  for (int c : tree.children(id)) {
    if (!first) out += ',';
    first = false;
    write_subtree(tree, c, with_annotations, out);
  }
  out += ')';
  if (with_annotations && tree.node(id).annotation) out += format_double(*tree.node(id).annotation);
}

nlohmann::json subtree_json(const RootedTree& tree, int id) {
  nlohmann::json out;
  const auto& n = tree.node(id);
  if (tree.is_leaf(id)) {
    out["label"] = n.label;
    return out;
  }
  out["children"] = nlohmann::json::array();
  for (int c : n.children) out["children"].push_back(subtree_json(tree, c));
  if (n.annotation) out["annotation"] = *n.annotation;
  return out;
}

int subtree_from_json(const nlohmann::json& value, TreeBuilder& builder) {
  if (!value.is_object()) throw DataError("tree JSON node must be an object");
  if (value.contains("children")) {
    const auto& kids_json = value.at("children");
    if (!kids_json.is_array()) throw DataError("tree JSON 'children' must be an array");
    std::vector<int> kids;
    for (const auto& k : kids_json) kids.push_back(subtree_from_json(k, builder));
    std::optional<double> annotation;
    if (value.contains("annotation") && !value.at("annotation").is_null())
      annotation = value.at("annotation").get<double>();
    return builder.internal(std::move(kids), annotation);
  }
  if (!value.contains("label") || !value.at("label").is_string())
    throw DataError("tree JSON leaf needs a string 'label'");
  return builder.leaf(value.at("label").get<std::string>());
}

}  // namespace

RootedTree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

std::string write_newick(const RootedTree& tree, bool with_annotations) {
  std::string out;
  if (!tree.empty()) write_subtree(tree, tree.root(), with_annotations, out);
  out += ';';
  return out;
}

std::string quote_label(std::string_view label) {
  bool plain = !label.empty();
  for (char c : label) plain = plain && is_plain_char(c);
  if (plain) return std::string(label);
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

nlohmann::json tree_to_json(const RootedTree& tree) { return subtree_json(tree, tree.root()); }

RootedTree tree_from_json(const nlohmann::json& value) {
  TreeBuilder builder;
  try {
    const int root = subtree_from_json(value, builder);
    return builder.build(root);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid tree JSON: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid tree JSON: ") + e.what());
  }
}

}  // namespace nacest
