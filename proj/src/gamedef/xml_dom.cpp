#include "mep/gamedef/xml_dom.hpp"

#include <expat.h>

#include <memory>
#include <optional>

#include "mep/error.hpp"

namespace mep::gamedef {

const std::string* XmlElement::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

namespace {

struct Builder {
  XML_Parser parser = nullptr;
  std::vector<XmlElement> stack;
  std::optional<XmlElement> root;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<Builder*>(user);
  XmlElement e;
  e.name = name;
  e.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser));
  e.column = static_cast<int>(XML_GetCurrentColumnNumber(b->parser)) + 1;
  for (int i = 0; attrs[i] != nullptr; i += 2) e.attributes.emplace_back(attrs[i], attrs[i + 1]);
  b->stack.push_back(std::move(e));
}

void on_end(void* user, const XML_Char* /*name*/) {
  auto* b = static_cast<Builder*>(user);
  XmlElement done = std::move(b->stack.back());
  b->stack.pop_back();
  if (b->stack.empty()) {
    b->root = std::move(done);
  } else {
    b->stack.back().children.push_back(std::move(done));
  }
}

void on_text(void* user, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(user);
  if (!b->stack.empty()) b->stack.back().text.append(s, static_cast<std::size_t>(len));
}

struct ParserDeleter {
  void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

}  // namespace

XmlElement parse_xml(std::string_view text, const std::string& document_name) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw Error(ErrorCode::ParseError, "cannot create XML parser");

  Builder b;
  b.parser = parser.get();
  XML_SetUserData(parser.get(), &b);
  XML_SetElementHandler(parser.get(), &on_start, &on_end);
  XML_SetCharacterDataHandler(parser.get(), &on_text);

  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    const int line = static_cast<int>(XML_GetCurrentLineNumber(parser.get()));
    const int column = static_cast<int>(XML_GetCurrentColumnNumber(parser.get())) + 1;
    throw Error(ErrorCode::ParseError,
                document_name + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                    XML_ErrorString(XML_GetErrorCode(parser.get())),
                {{"document", document_name}, {"line", line}, {"column", column}});
  }
  if (!b.root) {
    throw Error(ErrorCode::ParseError, document_name + ": empty document",
                {{"document", document_name}, {"line", 1}, {"column", 1}});
  }
  return std::move(*b.root);
}

}  // namespace mep::gamedef
