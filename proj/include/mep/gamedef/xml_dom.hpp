#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mep::gamedef {

// Minimal element tree built from expat events. Attribute order is kept as
// written; text is the concatenated character data directly inside the
// element.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<XmlElement> children;
  int line = 0;
  int column = 0;

  const std::string* attribute(std::string_view key) const;
};

// Throws mep::Error(ParseError) with details {document, line, column} for any
// malformed input.
XmlElement parse_xml(std::string_view text, const std::string& document_name);

}  // namespace mep::gamedef
