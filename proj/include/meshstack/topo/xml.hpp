#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "meshstack/util/result.hpp"

namespace meshstack::topo {

// Minimal XML reader covering the configuration schema: elements, attributes,
// character data, comments, an optional declaration, and the five standard
// entities. No namespaces, CDATA, DTDs or processing instructions. Errors
// carry line and column.
struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlNode> children;
  std::string text;
  int line = 0;
  int col = 0;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

Result<XmlNode> xml_parse(std::string_view src);

}  // namespace meshstack::topo
