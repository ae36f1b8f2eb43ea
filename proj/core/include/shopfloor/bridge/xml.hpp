#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace shopfloor::bridge {

// Element-and-attribute XML subset used by the wire protocol and the model
// files: no text nodes, no processing instructions, no namespaces. Canonical
// output carries no insignificant whitespace and always writes explicit end
// tags; the parser additionally accepts self-closing tags and whitespace
// between elements.
struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;  // serialized in order
    std::vector<XmlNode> children;
    std::size_t offset = 0;  // byte offset in the parsed input

    const std::string* attr(const std::string& name) const;
    const XmlNode* child(const std::string& name) const;

    bool operator==(const XmlNode& other) const;
};

std::string xml_escape(const std::string& s);

// Canonical byte form; equal nodes produce equal bytes.
std::string write_xml(const XmlNode& node);

// Throws ParseError with kind MalformedXml and a byte offset.
XmlNode parse_xml(const std::string& bytes);

}  // namespace shopfloor::bridge
