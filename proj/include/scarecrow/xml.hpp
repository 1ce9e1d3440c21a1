#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scarecrow::xml {

struct Position {
  int line = 1;
  int column = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, Position pos)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + msg),
        pos_(pos) {}
  Position position() const { return pos_; }

 private:
  Position pos_;
};

/// Element node. Attributes are parsed and dropped; mixed content is
/// concatenated into `text`.
struct Element {
  std::string name;
  std::string text;
  Position pos;
  std::vector<Element> children;

  /// First child with the given name, or nullptr.
  const Element* child(std::string_view name) const;
  std::vector<const Element*> children_named(std::string_view name) const;
};

/// Parses a document with a single root element. Handles the XML
/// declaration, comments, CDATA, and the five predefined entities plus
/// numeric character references. DTDs are skipped.
Element parse(std::string_view text);

std::string escape(std::string_view text);

}  // namespace scarecrow::xml
