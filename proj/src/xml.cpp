#include "scarecrow/xml.hpp"

#include <cctype>

namespace scarecrow::xml {

const Element* Element::child(std::string_view n) const {
  for (const Element& c : children) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view n) const {
  std::vector<const Element*> out;
  for (const Element& c : children) {
    if (c.name == n) out.push_back(&c);
  }
  return out;
}

namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Element document() {
    skip_misc();
    if (at_end() || peek() != '<') fail("expected a root element");
    Element root = element();
    skip_misc();
    if (!at_end()) fail("content after the root element");
    return root;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  Position pos_;

  bool at_end() const { return i_ >= s_.size(); }
  char peek() const { return s_[i_]; }
  bool starts_with(std::string_view p) const { return s_.substr(i_, p.size()) == p; }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, Position at) const { throw ParseError(msg, at); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void skip_until(std::string_view end, const char* what) {
    const Position start = pos_;
    const std::size_t found = s_.find(end, i_);
    if (found == std::string_view::npos) fail(std::string("unterminated ") + what, start);
    advance(found + end.size() - i_);
  }

  // Prolog, comments, processing instructions, doctype.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  void skip_doctype() {
    const Position start = pos_;
    int depth = 0;
    while (!at_end()) {
      const char c = peek();
      advance();
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth == 0) return;
    }
    fail("unterminated DOCTYPE", start);
  }

  std::string name() {
    if (at_end() || !is_name_start(peek())) fail("expected a name");
    const std::size_t start = i_;
    while (!at_end() && is_name_char(peek())) advance();
    return std::string(s_.substr(start, i_ - start));
  }

  void reference(std::string& out) {
    const Position start = pos_;
    advance();  // '&'
    const std::size_t semi = s_.find(';', i_);
    if (semi == std::string_view::npos || semi - i_ > 10) fail("malformed entity reference", start);
    const std::string_view ent = s_.substr(i_, semi - i_);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent.size() > 1 && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = ent[1] == 'x' ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                           : std::stoul(std::string(ent.substr(1)), nullptr, 10);
      } catch (const std::exception&) {
        fail("malformed character reference", start);
      }
      if (cp == 0 || cp > 0x10FFFF) fail("character reference out of range", start);
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ent) + ";'", start);
    }
    advance(semi + 1 - i_);
  }

  void attributes() {
    for (;;) {
      skip_space();
      if (at_end()) fail("unterminated start tag");
      if (peek() == '>' || peek() == '/') return;
      name();
      skip_space();
      if (at_end() || peek() != '=') fail("expected '=' after attribute name");
      advance();
      skip_space();
      if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
      const char quote = peek();
      const Position start = pos_;
      advance();
      while (!at_end() && peek() != quote) {
        if (peek() == '<') fail("'<' inside attribute value");
        advance();
      }
      if (at_end()) fail("unterminated attribute value", start);
      advance();
    }
  }

  Element element() {
    Element el;
    el.pos = pos_;
    advance();  // '<'
    el.name = name();
    attributes();
    if (peek() == '/') {
      advance();
      if (at_end() || peek() != '>') fail("expected '>' after '/'");
      advance();
      return el;
    }
    advance();  // '>'

    for (;;) {
      if (at_end()) fail("element <" + el.name + "> is never closed", el.pos);
      const char c = peek();
      if (c == '<') {
        if (starts_with("</")) {
          const Position close = pos_;
          advance(2);
          const std::string end = name();
          if (end != el.name) {
            fail("closing tag </" + end + "> does not match <" + el.name + ">", close);
          }
          skip_space();
          if (at_end() || peek() != '>') fail("expected '>' in closing tag");
          advance();
          return el;
        }
        if (starts_with("<!--")) {
          skip_until("-->", "comment");
        } else if (starts_with("<![CDATA[")) {
          advance(9);
          const Position start = pos_;
          const std::size_t end = s_.find("]]>", i_);
          if (end == std::string_view::npos) fail("unterminated CDATA section", start);
          el.text += s_.substr(i_, end - i_);
          advance(end + 3 - i_);
        } else if (starts_with("<?")) {
          skip_until("?>", "processing instruction");
        } else {
          el.children.push_back(element());
        }
      } else if (c == '&') {
        reference(el.text);
      } else {
        el.text += c;
        advance();
      }
    }
  }
};

}  // namespace

Element parse(std::string_view text) { return Parser(text).document(); }

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace scarecrow::xml
