#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shopfloor/bridge/xml.hpp"
#include "shopfloor/mes/types.hpp"
#include "shopfloor/petri/types.hpp"

namespace shopfloor::bridge {

using petri::TimeMs;

// Descriptor documents exchanged when the layers introduce themselves.
struct MasDescriptor {
    std::string name;
    std::vector<std::string> agents;
    std::vector<std::string> objects;
    std::vector<std::string> states;
    std::vector<std::string> actions;

    bool operator==(const MasDescriptor&) const = default;
};

struct AgentAction {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;

    bool operator==(const AgentAction&) const = default;
};

struct AgentDescriptor {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string state;
    TimeMs state_time = 0;
    std::vector<AgentAction> actions;

    bool operator==(const AgentDescriptor&) const = default;
};

struct ObjectDescriptor {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string state;
    TimeMs state_time = 0;

    bool operator==(const ObjectDescriptor&) const = default;
};

// Command into the simulator and observation out of it.
struct ActionCommand {
    std::string target;  // object name, e.g. "CNC"
    std::string action;  // e.g. "start-machining"
    std::map<std::string, std::string> params;
    TimeMs issued_at = 0;

    bool operator==(const ActionCommand&) const = default;
};

struct StateUpdate {
    std::string object;
    std::string state;
    TimeMs timestamp = 0;
    std::map<std::string, std::string> payload;

    bool operator==(const StateUpdate&) const = default;
};

// Canonical serialization: NAME-style attributes first in a fixed order,
// child sections in a fixed order, UTF-8, no insignificant whitespace.
std::string serialize(const MasDescriptor& d);
std::string serialize(const AgentDescriptor& d);
std::string serialize(const std::vector<ObjectDescriptor>& objects);
std::string serialize(const mes::AgentMessage& m);
std::string serialize(const ActionCommand& c);
std::string serialize(const StateUpdate& u);

using ProtocolMessage = std::variant<MasDescriptor, AgentDescriptor, std::vector<ObjectDescriptor>,
                                     mes::AgentMessage, ActionCommand, StateUpdate>;

// Inverse of serialize on its image. Throws ParseError: MalformedXml with a
// byte offset, UnknownElement for vocabulary violations, MissingName when a
// NAME-bearing element lacks one.
ProtocolMessage parse(const std::string& bytes);

std::string serialize(const ProtocolMessage& m);

// Descriptors for the running platform, used by the golden fixtures and the
// CLI describe output.
MasDescriptor platform_mas_descriptor();
AgentDescriptor platform_agent_descriptor();
std::vector<ObjectDescriptor> platform_objects_descriptor();

}  // namespace shopfloor::bridge
