#include "shopfloor/bridge/xml.hpp"

#include "shopfloor/errors.hpp"

namespace shopfloor::bridge {

const std::string* XmlNode::attr(const std::string& attr_name) const {
    for (const auto& [k, v] : attrs)
        if (k == attr_name) return &v;
    return nullptr;
}

const XmlNode* XmlNode::child(const std::string& child_name) const {
    for (const auto& c : children)
        if (c.name == child_name) return &c;
    return nullptr;
}

bool XmlNode::operator==(const XmlNode& other) const {
    return name == other.name && attrs == other.attrs && children == other.children;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

void write_node(const XmlNode& node, std::string& out) {
    out += '<';
    out += node.name;
    for (const auto& [k, v] : node.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        out += xml_escape(v);
        out += '"';
    }
    out += '>';
    for (const auto& c : node.children) write_node(c, out);
    out += "</";
    out += node.name;
    out += '>';
}

struct Parser {
    const std::string& in;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw ParseError(ParseError::Kind::MalformedXml, at,
                         what + " at byte " + std::to_string(at));
    }

    bool eof() const { return pos >= in.size(); }
    char peek() const { return in[pos]; }

    void skip_ws() {
        while (!eof() && (in[pos] == ' ' || in[pos] == '\t' || in[pos] == '\r' || in[pos] == '\n'))
            ++pos;
    }

    static bool name_char(char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_' || c == '.' || c == ':';
    }

    std::string read_name() {
        const std::size_t start = pos;
        while (!eof() && name_char(in[pos])) ++pos;
        if (pos == start) fail("expected name", start);
        return in.substr(start, pos - start);
    }

    std::string read_attr_value() {
        if (eof() || in[pos] != '"') fail("expected '\"'", pos);
        ++pos;
        std::string out;
        while (!eof() && in[pos] != '"') {
            if (in[pos] == '&') {
                const std::size_t amp = pos;
                auto expect = [&](const char* ent, char ch) {
                    const std::size_t n = std::string(ent).size();
                    if (in.compare(pos, n, ent) == 0) {
                        out += ch;
                        pos += n;
                        return true;
                    }
                    return false;
                };
                if (!expect("&amp;", '&') && !expect("&lt;", '<') && !expect("&gt;", '>') &&
                    !expect("&quot;", '"') && !expect("&apos;", '\''))
                    fail("bad entity", amp);
                continue;
            }
            if (in[pos] == '<') fail("'<' in attribute value", pos);
            out += in[pos++];
        }
        if (eof()) fail("unterminated attribute value", pos);
        ++pos;
        return out;
    }

    XmlNode read_element() {
        skip_ws();
        if (eof() || in[pos] != '<') fail("expected '<'", pos);
        XmlNode node;
        node.offset = pos;
        ++pos;
        node.name = read_name();
        while (true) {
            skip_ws();
            if (eof()) fail("unterminated start tag", pos);
            if (in[pos] == '>') {
                ++pos;
                break;
            }
            if (in[pos] == '/') {
                ++pos;
                if (eof() || in[pos] != '>') fail("expected '/>'", pos);
                ++pos;
                return node;  // self-closing
            }
            std::string key = read_name();
            skip_ws();
            if (eof() || in[pos] != '=') fail("expected '='", pos);
            ++pos;
            skip_ws();
            node.attrs.emplace_back(std::move(key), read_attr_value());
        }
        // Children until the matching end tag.
        while (true) {
            skip_ws();
            if (eof()) fail("missing </" + node.name + ">", pos);
            if (in[pos] != '<')
                fail("text content is not part of the protocol", pos);
            if (pos + 1 < in.size() && in[pos + 1] == '/') {
                const std::size_t at = pos;
                pos += 2;
                std::string end = read_name();
                if (end != node.name) fail("mismatched end tag </" + end + ">", at);
                skip_ws();
                if (eof() || in[pos] != '>') fail("expected '>'", pos);
                ++pos;
                return node;
            }
            node.children.push_back(read_element());
        }
    }
};

}  // namespace

std::string write_xml(const XmlNode& node) {
    std::string out;
    write_node(node, out);
    return out;
}

XmlNode parse_xml(const std::string& bytes) {
    Parser p{bytes};
    XmlNode root = p.read_element();
    p.skip_ws();
    if (!p.eof()) p.fail("trailing content after document element", p.pos);
    return root;
}

}  // namespace shopfloor::bridge
