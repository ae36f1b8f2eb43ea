#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/petri/types.hpp"

namespace shopfloor::mes {

using petri::TimeMs;

enum class Role {
    SMA,        // shop management agent: owns the order book
    AM,         // agent manager: owns allocations and drives negotiations
    SMCA,       // shop monitoring and command agent
    SCA,        // station control agent
    SMonA,      // station monitoring agent
    AMI,        // agent machine interface: the bridge endpoint per station
    MRA,        // manufacturing resource agent, one per resource
    DbaShop,    // shop database agent
    DbaStation, // station database agent
};

std::string role_str(Role r);
bool role_is_station_level(Role r);

struct AgentId {
    Role role = Role::SMA;
    int instance = 0;
    std::optional<std::string> station;  // required for station-level roles

    std::string str() const;
    bool operator==(const AgentId&) const = default;
    bool operator<(const AgentId& other) const { return str() < other.str(); }
};

AgentId shop_agent(Role r);
AgentId station_agent(Role r, const std::string& station, int instance = 0);

enum class Performative { Request, Inform, Query, Propose, Accept, Refuse, Command, Notify };

std::string performative_str(Performative p);
std::optional<Performative> performative_from(const std::string& s);

struct AgentMessage {
    std::string conversation_id;
    AgentId sender;
    AgentId receiver;
    Performative performative = Performative::Inform;
    std::optional<std::uint64_t> in_reply_to;  // sender-scoped seq of the counterpart
    std::uint64_t seq = 0;                     // strictly increasing per sender
    std::map<std::string, std::string> payload;
    TimeMs sent_at = 0;
};

std::string message_line(const AgentMessage& m);
// Inverse of message_line; throws Error on malformed input.
AgentMessage message_from_line(const std::string& line);

// Parses "<role>#<instance>[@<station>]"; throws UnknownAgentError.
AgentId agent_id_from_str(const std::string& s);

struct TaskAnnouncement {
    std::string task_id;
    std::int64_t order_id = 0;
    std::vector<std::string> required_capabilities;
    std::optional<TimeMs> deadline;
    // Operation context carried through the conversation.
    std::string op;  // retrieve-move | machine | move-to-assembly | assemble | store
    std::optional<std::int64_t> part_id;
};

struct AvailabilityReply {
    std::string task_id;
    std::string station;
    bool available = false;
    std::optional<TimeMs> earliest_start;  // present iff available

    std::map<std::string, std::string> to_payload() const;
    static AvailabilityReply from_payload(const std::map<std::string, std::string>& payload);
};

struct CapabilityRecord {
    std::string resource;
    std::string capability;
    std::string station;
    TimeMs duration_ms = 0;
};

struct Allocation {
    std::string task_id;
    std::string station;
    std::vector<std::string> resources;  // exclusive commitments only
    TimeMs start = 0;
    TimeMs end = 0;
};

// Operation vocabulary shared by the order chains and the bridge tables.
inline constexpr const char* kOpRetrieveMove = "retrieve-move";
inline constexpr const char* kOpMachine = "machine";
inline constexpr const char* kOpMoveToAssembly = "move-to-assembly";
inline constexpr const char* kOpAssemble = "assemble";
inline constexpr const char* kOpStore = "store";

std::vector<std::string> op_required_capabilities(const std::string& op);
// Resources a dispatched operation commits exclusively (empty for moves).
std::vector<std::string> op_exclusive_resources(const std::string& op);

}  // namespace shopfloor::mes
