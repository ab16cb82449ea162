#include "meshstack/topo/xml.hpp"

#include <cctype>

namespace meshstack::topo {

namespace {

struct Cursor {
  std::string_view src;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= src.size(); }
  char peek(size_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  char take() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }
  bool starts_with(std::string_view s) const { return src.substr(pos, s.size()) == s; }
  void skip(size_t n) {
    for (size_t i = 0; i < n && !eof(); ++i) take();
  }
  std::string where() const {
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
  }
};

struct Parser {
  Cursor c;
  std::string err;

  bool fail(const std::string& msg) {
    if (err.empty()) err = msg + " at " + c.where();
    return false;
  }

  void skip_ws() {
    while (!c.eof() && std::isspace(static_cast<unsigned char>(c.peek()))) c.take();
  }

  bool skip_misc() {
    // Comments, declaration, and whitespace between markup.
    for (;;) {
      skip_ws();
      if (c.starts_with("<!--")) {
        c.skip(4);
        while (!c.eof() && !c.starts_with("-->")) c.take();
        if (c.eof()) return fail("unterminated comment");
        c.skip(3);
      } else if (c.starts_with("<?")) {
        c.skip(2);
        while (!c.eof() && !c.starts_with("?>")) c.take();
        if (c.eof()) return fail("unterminated declaration");
        c.skip(2);
      } else {
        return true;
      }
    }
  }

  static bool name_start(char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || ch == ':';
  }
  static bool name_char(char ch) {
    return name_start(ch) || std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.';
  }

  bool parse_name(std::string* out) {
    if (c.eof() || !name_start(c.peek())) return fail("expected a name");
    out->clear();
    while (!c.eof() && name_char(c.peek())) out->push_back(c.take());
    return true;
  }

  bool decode_entity(std::string* out) {
    // Called after '&' was consumed.
    std::string ent;
    while (!c.eof() && c.peek() != ';') ent.push_back(c.take());
    if (c.eof()) return fail("unterminated entity reference");
    c.take();
    if (ent == "lt") *out += '<';
    else if (ent == "gt") *out += '>';
    else if (ent == "amp") *out += '&';
    else if (ent == "quot") *out += '"';
    else if (ent == "apos") *out += '\'';
    else return fail("unknown entity '&" + ent + ";'");
    return true;
  }

  bool parse_attr_value(std::string* out) {
    if (c.peek() != '"' && c.peek() != '\'') return fail("expected a quoted attribute value");
    char quote = c.take();
    out->clear();
    while (!c.eof() && c.peek() != quote) {
      char ch = c.take();
      if (ch == '&') {
        if (!decode_entity(out)) return false;
      } else {
        out->push_back(ch);
      }
    }
    if (c.eof()) return fail("unterminated attribute value");
    c.take();
    return true;
  }

  bool parse_element(XmlNode* node) {
    if (c.peek() != '<') return fail("expected '<'");
    node->line = c.line;
    node->col = c.col;
    c.take();
    if (!parse_name(&node->name)) return false;
    for (;;) {
      skip_ws();
      if (c.eof()) return fail("unterminated element <" + node->name + ">");
      if (c.peek() == '/') {
        c.take();
        if (c.peek() != '>') return fail("expected '>' after '/'");
        c.take();
        return true;  // self-closing
      }
      if (c.peek() == '>') {
        c.take();
        break;
      }
      std::string key, value;
      if (!parse_name(&key)) return false;
      skip_ws();
      if (c.peek() != '=') return fail("expected '=' after attribute name '" + key + "'");
      c.take();
      skip_ws();
      if (!parse_attr_value(&value)) return false;
      for (const auto& [k, v] : node->attrs)
        if (k == key) return fail("duplicate attribute '" + key + "'");
      node->attrs.emplace_back(std::move(key), std::move(value));
    }

    // Content: children and character data until the matching close tag.
    for (;;) {
      if (c.eof()) return fail("missing close tag </" + node->name + ">");
      if (c.starts_with("<!--")) {
        c.skip(4);
        while (!c.eof() && !c.starts_with("-->")) c.take();
        if (c.eof()) return fail("unterminated comment");
        c.skip(3);
      } else if (c.starts_with("</")) {
        c.skip(2);
        std::string close;
        if (!parse_name(&close)) return false;
        if (close != node->name)
          return fail("close tag </" + close + "> does not match <" + node->name + ">");
        skip_ws();
        if (c.peek() != '>') return fail("expected '>' in close tag");
        c.take();
        return true;
      } else if (c.peek() == '<') {
        XmlNode child;
        if (!parse_element(&child)) return false;
        node->children.push_back(std::move(child));
      } else {
        char ch = c.take();
        if (ch == '&') {
          if (!decode_entity(&node->text)) return false;
        } else {
          node->text.push_back(ch);
        }
      }
    }
  }
};

}  // namespace

Result<XmlNode> xml_parse(std::string_view src) {
  using R = Result<XmlNode>;
  Parser p{Cursor{src}, {}};
  if (!p.skip_misc()) return R::failure(p.err);
  if (p.c.eof()) return R::failure("no root element found");
  XmlNode root;
  if (!p.parse_element(&root)) return R::failure(p.err);
  if (!p.skip_misc()) return R::failure(p.err);
  if (!p.c.eof()) return R::failure("trailing content after root element at " + p.c.where());
  return R::success(std::move(root));
}

}  // namespace meshstack::topo
