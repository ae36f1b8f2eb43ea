#include "shopfloor/bridge/codec.hpp"

#include "shopfloor/errors.hpp"
#include "shopfloor/fms/config.hpp"

namespace shopfloor::bridge {

namespace {

void check_serializable(const std::string& s) {
    for (unsigned char c : s) {
        if (c < 0x20 && c != '\t' && c != '\n' && c != '\r')
            throw UnserializableError("control byte 0x" + std::to_string(c) + " in payload");
    }
}

XmlNode named_list(const char* list_name, const char* item_name,
                   const std::vector<std::string>& names) {
    XmlNode list;
    list.name = list_name;
    for (const auto& n : names) {
        XmlNode item;
        item.name = item_name;
        item.attrs = {{"NAME", n}};
        list.children.push_back(std::move(item));
    }
    return list;
}

XmlNode attributes_node(const std::vector<std::pair<std::string, std::string>>& attrs) {
    XmlNode node;
    node.name = "ATTRIBUTES";
    for (const auto& [k, v] : attrs) {
        XmlNode a;
        a.name = "ATTRIBUTE";
        a.attrs = {{"NAME", k}, {"VALUE", v}};
        node.children.push_back(std::move(a));
    }
    return node;
}

XmlNode current_state_node(const std::string& state, TimeMs time) {
    XmlNode node;
    node.name = "CURRENT-STATE";
    node.attrs = {{"STATE", state}, {"TIME", std::to_string(time)}};
    return node;
}

XmlNode field_node(const char* element, const std::string& name, const std::string& value) {
    XmlNode node;
    node.name = element;
    node.attrs = {{"NAME", name}, {"VALUE", value}};
    return node;
}

const std::string& require_attr(const XmlNode& node, const char* name) {
    const std::string* v = node.attr(name);
    if (!v) {
        if (std::string(name) == "NAME")
            throw ParseError(ParseError::Kind::MissingName, node.offset,
                             "<" + node.name + "> lacks NAME");
        throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                         "<" + node.name + "> lacks attribute " + name);
    }
    return *v;
}

TimeMs attr_time(const XmlNode& node, const char* name) {
    try {
        return std::stoll(require_attr(node, name));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                         "bad integer attribute " + std::string(name));
    }
}

[[noreturn]] void unknown_element(const XmlNode& node, const std::string& context) {
    throw ParseError(ParseError::Kind::UnknownElement, node.offset,
                     "unknown element <" + node.name + "> in " + context);
}

std::vector<std::string> decode_named_list(const XmlNode& list, const char* item_name) {
    std::vector<std::string> out;
    for (const auto& c : list.children) {
        if (c.name != item_name) unknown_element(c, list.name);
        out.push_back(require_attr(c, "NAME"));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> decode_attributes(const XmlNode& node) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : node.children) {
        if (c.name != "ATTRIBUTE") unknown_element(c, node.name);
        out.emplace_back(require_attr(c, "NAME"), require_attr(c, "VALUE"));
    }
    return out;
}

const XmlNode& require_child(const XmlNode& node, const char* name) {
    const XmlNode* c = node.child(name);
    if (!c)
        throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                         "<" + node.name + "> lacks <" + name + ">");
    return *c;
}

}  // namespace

std::string serialize(const MasDescriptor& d) {
    check_serializable(d.name);
    XmlNode root;
    root.name = "MAS";
    root.attrs = {{"NAME", d.name}};
    root.children.push_back(named_list("AGENTS-LIST", "AGENT", d.agents));
    root.children.push_back(named_list("OBJECT-LIST", "OBJECT", d.objects));
    root.children.push_back(named_list("STATES-LIST", "STATE", d.states));
    root.children.push_back(named_list("ACTIONS-LIST", "ACTION", d.actions));
    return write_xml(root);
}

std::string serialize(const AgentDescriptor& d) {
    XmlNode root;
    root.name = "AGENT";
    root.attrs = {{"NAME", d.name}};
    root.children.push_back(attributes_node(d.attributes));
    root.children.push_back(current_state_node(d.state, d.state_time));
    XmlNode actions;
    actions.name = "ACTIONS";
    for (const auto& a : d.actions) {
        XmlNode act;
        act.name = "ACTION";
        act.attrs = {{"NAME", a.name}};
        for (const auto& [k, v] : a.params) act.children.push_back(field_node("PARAM", k, v));
        actions.children.push_back(std::move(act));
    }
    root.children.push_back(std::move(actions));
    return write_xml(root);
}

std::string serialize(const std::vector<ObjectDescriptor>& objects) {
    XmlNode root;
    root.name = "OBJECTS-LIST";
    for (const auto& o : objects) {
        XmlNode obj;
        obj.name = "OBJECT";
        obj.attrs = {{"NAME", o.name}};
        obj.children.push_back(attributes_node(o.attributes));
        obj.children.push_back(current_state_node(o.state, o.state_time));
        root.children.push_back(std::move(obj));
    }
    return write_xml(root);
}

std::string serialize(const mes::AgentMessage& m) {
    XmlNode root;
    root.name = "MESSAGE";
    root.attrs = {{"CONVERSATION", m.conversation_id},
                  {"SENDER", m.sender.str()},
                  {"RECEIVER", m.receiver.str()},
                  {"PERFORMATIVE", mes::performative_str(m.performative)},
                  {"SEQ", std::to_string(m.seq)}};
    if (m.in_reply_to) root.attrs.emplace_back("REPLY-TO", std::to_string(*m.in_reply_to));
    root.attrs.emplace_back("TIME", std::to_string(m.sent_at));
    XmlNode payload;
    payload.name = "PAYLOAD";
    for (const auto& [k, v] : m.payload) {
        check_serializable(k);
        check_serializable(v);
        payload.children.push_back(field_node("FIELD", k, v));
    }
    root.children.push_back(std::move(payload));
    return write_xml(root);
}

std::string serialize(const ActionCommand& c) {
    XmlNode root;
    root.name = "ACTION-COMMAND";
    root.attrs = {{"TARGET", c.target}, {"ACTION", c.action}, {"TIME", std::to_string(c.issued_at)}};
    for (const auto& [k, v] : c.params) root.children.push_back(field_node("PARAM", k, v));
    return write_xml(root);
}

std::string serialize(const StateUpdate& u) {
    XmlNode root;
    root.name = "STATE-UPDATE";
    root.attrs = {{"NAME", u.object}, {"STATE", u.state}, {"TIME", std::to_string(u.timestamp)}};
    for (const auto& [k, v] : u.payload) root.children.push_back(field_node("FIELD", k, v));
    return write_xml(root);
}

std::string serialize(const ProtocolMessage& m) {
    return std::visit([](const auto& v) { return serialize(v); }, m);
}

namespace {

mes::AgentId agent_id_from(const std::string& s, const XmlNode& node) {
    try {
        return mes::agent_id_from_str(s);
    } catch (const UnknownAgentError& e) {
        throw ParseError(ParseError::Kind::MalformedXml, node.offset, e.what());
    }
}

MasDescriptor decode_mas(const XmlNode& root) {
    MasDescriptor d;
    d.name = require_attr(root, "NAME");
    for (const auto& c : root.children) {
        if (c.name == "AGENTS-LIST") d.agents = decode_named_list(c, "AGENT");
        else if (c.name == "OBJECT-LIST") d.objects = decode_named_list(c, "OBJECT");
        else if (c.name == "STATES-LIST") d.states = decode_named_list(c, "STATE");
        else if (c.name == "ACTIONS-LIST") d.actions = decode_named_list(c, "ACTION");
        else unknown_element(c, "MAS");
    }
    return d;
}

AgentDescriptor decode_agent(const XmlNode& root) {
    AgentDescriptor d;
    d.name = require_attr(root, "NAME");
    d.attributes = decode_attributes(require_child(root, "ATTRIBUTES"));
    const auto& cs = require_child(root, "CURRENT-STATE");
    d.state = require_attr(cs, "STATE");
    d.state_time = attr_time(cs, "TIME");
    for (const auto& c : root.children) {
        if (c.name == "ATTRIBUTES" || c.name == "CURRENT-STATE") continue;
        if (c.name != "ACTIONS") unknown_element(c, "AGENT");
        for (const auto& act : c.children) {
            if (act.name != "ACTION") unknown_element(act, "ACTIONS");
            AgentAction a;
            a.name = require_attr(act, "NAME");
            for (const auto& p : act.children) {
                if (p.name != "PARAM") unknown_element(p, "ACTION");
                a.params.emplace_back(require_attr(p, "NAME"), require_attr(p, "VALUE"));
            }
            d.actions.push_back(std::move(a));
        }
    }
    return d;
}

std::vector<ObjectDescriptor> decode_objects(const XmlNode& root) {
    std::vector<ObjectDescriptor> out;
    for (const auto& c : root.children) {
        if (c.name != "OBJECT") unknown_element(c, "OBJECTS-LIST");
        ObjectDescriptor o;
        o.name = require_attr(c, "NAME");
        o.attributes = decode_attributes(require_child(c, "ATTRIBUTES"));
        const auto& cs = require_child(c, "CURRENT-STATE");
        o.state = require_attr(cs, "STATE");
        o.state_time = attr_time(cs, "TIME");
        for (const auto& section : c.children)
            if (section.name != "ATTRIBUTES" && section.name != "CURRENT-STATE")
                unknown_element(section, "OBJECT");
        out.push_back(std::move(o));
    }
    return out;
}

mes::AgentMessage decode_message(const XmlNode& root) {
    mes::AgentMessage m;
    m.conversation_id = require_attr(root, "CONVERSATION");
    m.sender = agent_id_from(require_attr(root, "SENDER"), root);
    m.receiver = agent_id_from(require_attr(root, "RECEIVER"), root);
    auto perf = mes::performative_from(require_attr(root, "PERFORMATIVE"));
    if (!perf)
        throw ParseError(ParseError::Kind::MalformedXml, root.offset, "unknown performative");
    m.performative = *perf;
    m.seq = static_cast<std::uint64_t>(attr_time(root, "SEQ"));
    if (root.attr("REPLY-TO")) m.in_reply_to = static_cast<std::uint64_t>(attr_time(root, "REPLY-TO"));
    m.sent_at = attr_time(root, "TIME");
    const auto& payload = require_child(root, "PAYLOAD");
    for (const auto& f : payload.children) {
        if (f.name != "FIELD") unknown_element(f, "PAYLOAD");
        m.payload[require_attr(f, "NAME")] = require_attr(f, "VALUE");
    }
    for (const auto& c : root.children)
        if (c.name != "PAYLOAD") unknown_element(c, "MESSAGE");
    return m;
}

ActionCommand decode_command(const XmlNode& root) {
    ActionCommand c;
    c.target = require_attr(root, "TARGET");
    c.action = require_attr(root, "ACTION");
    c.issued_at = attr_time(root, "TIME");
    for (const auto& p : root.children) {
        if (p.name != "PARAM") unknown_element(p, "ACTION-COMMAND");
        c.params[require_attr(p, "NAME")] = require_attr(p, "VALUE");
    }
    return c;
}

StateUpdate decode_update(const XmlNode& root) {
    StateUpdate u;
    u.object = require_attr(root, "NAME");
    u.state = require_attr(root, "STATE");
    u.timestamp = attr_time(root, "TIME");
    for (const auto& f : root.children) {
        if (f.name != "FIELD") unknown_element(f, "STATE-UPDATE");
        u.payload[require_attr(f, "NAME")] = require_attr(f, "VALUE");
    }
    return u;
}

}  // namespace

ProtocolMessage parse(const std::string& bytes) {
    XmlNode root = parse_xml(bytes);
    if (root.name == "MAS") return decode_mas(root);
    if (root.name == "AGENT") return decode_agent(root);
    if (root.name == "OBJECTS-LIST") return decode_objects(root);
    if (root.name == "MESSAGE") return decode_message(root);
    if (root.name == "ACTION-COMMAND") return decode_command(root);
    if (root.name == "STATE-UPDATE") return decode_update(root);
    throw ParseError(ParseError::Kind::UnknownElement, root.offset,
                     "unknown message class <" + root.name + ">");
}

MasDescriptor platform_mas_descriptor() {
    MasDescriptor d;
    d.name = "RFIDMAS";
    d.agents = {"HA"};
    d.objects = {"ASRS"};
    return d;
}

AgentDescriptor platform_agent_descriptor() {
    AgentDescriptor d;
    d.name = "SMA";
    d.attributes = {{"LEVEL", "shop"}, {"OWNS", "order-book"}};
    d.state = "idle";
    d.state_time = 0;
    AgentAction announce;
    announce.name = "announce-task";
    announce.params = {{"TASK", ""}, {"OP", ""}};
    d.actions = {announce};
    return d;
}

std::vector<ObjectDescriptor> platform_objects_descriptor() {
    ObjectDescriptor asrs;
    asrs.name = "ASRS";
    asrs.attributes = {{"STATION", fms::kStationAsrs}};
    asrs.state = "idle";
    asrs.state_time = 0;
    return {asrs};
}

}  // namespace shopfloor::bridge
