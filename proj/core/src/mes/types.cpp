#include "shopfloor/mes/types.hpp"

#include "shopfloor/errors.hpp"

namespace shopfloor::mes {

std::string role_str(Role r) {
    switch (r) {
        case Role::SMA: return "SMA";
        case Role::AM: return "AM";
        case Role::SMCA: return "SMCA";
        case Role::SCA: return "SCA";
        case Role::SMonA: return "SMonA";
        case Role::AMI: return "AMI";
        case Role::MRA: return "MRA";
        case Role::DbaShop: return "DBA-shop";
        case Role::DbaStation: return "DBA-station";
    }
    return "?";
}

bool role_is_station_level(Role r) {
    switch (r) {
        case Role::SCA:
        case Role::SMonA:
        case Role::AMI:
        case Role::MRA:
        case Role::DbaStation:
            return true;
        default:
            return false;
    }
}

std::string AgentId::str() const {
    std::string out = role_str(role) + "#" + std::to_string(instance);
    if (station) out += "@" + *station;
    return out;
}

AgentId shop_agent(Role r) {
    if (role_is_station_level(r))
        throw UnknownAgentError("role " + role_str(r) + " requires a station");
    return AgentId{r, 0, std::nullopt};
}

AgentId station_agent(Role r, const std::string& station, int instance) {
    if (!role_is_station_level(r))
        throw UnknownAgentError("role " + role_str(r) + " is shop-level");
    return AgentId{r, instance, station};
}

std::string performative_str(Performative p) {
    switch (p) {
        case Performative::Request: return "request";
        case Performative::Inform: return "inform";
        case Performative::Query: return "query";
        case Performative::Propose: return "propose";
        case Performative::Accept: return "accept";
        case Performative::Refuse: return "refuse";
        case Performative::Command: return "command";
        case Performative::Notify: return "notify";
    }
    return "?";
}

std::optional<Performative> performative_from(const std::string& s) {
    if (s == "request") return Performative::Request;
    if (s == "inform") return Performative::Inform;
    if (s == "query") return Performative::Query;
    if (s == "propose") return Performative::Propose;
    if (s == "accept") return Performative::Accept;
    if (s == "refuse") return Performative::Refuse;
    if (s == "command") return Performative::Command;
    if (s == "notify") return Performative::Notify;
    return std::nullopt;
}

std::string message_line(const AgentMessage& m) {
    std::string out = std::to_string(m.sent_at);
    out += "|" + m.conversation_id;
    out += "|" + m.sender.str();
    out += "|" + m.receiver.str();
    out += "|" + performative_str(m.performative);
    out += "|" + std::to_string(m.seq);
    out += "|" + (m.in_reply_to ? std::to_string(*m.in_reply_to) : std::string("-"));
    out += "|";
    bool first = true;
    for (const auto& [k, v] : m.payload) {
        if (!first) out += ";";
        first = false;
        out += k + "=" + v;
    }
    return out;
}

std::map<std::string, std::string> AvailabilityReply::to_payload() const {
    std::map<std::string, std::string> out;
    out["task"] = task_id;
    out["station"] = station;
    out["available"] = available ? "true" : "false";
    if (earliest_start) out["earliest_start"] = std::to_string(*earliest_start);
    return out;
}

AvailabilityReply AvailabilityReply::from_payload(
    const std::map<std::string, std::string>& payload) {
    AvailabilityReply r;
    r.task_id = payload.at("task");
    r.station = payload.at("station");
    r.available = payload.at("available") == "true";
    if (r.available) r.earliest_start = std::stoll(payload.at("earliest_start"));
    return r;
}

AgentId agent_id_from_str(const std::string& s) {
    auto hash = s.find('#');
    if (hash == std::string::npos) throw UnknownAgentError("bad agent id '" + s + "'");
    auto at = s.find('@', hash);
    const std::string role_name = s.substr(0, hash);
    const std::string instance =
        at == std::string::npos ? s.substr(hash + 1) : s.substr(hash + 1, at - hash - 1);

    AgentId id;
    bool found = false;
    for (Role r : {Role::SMA, Role::AM, Role::SMCA, Role::SCA, Role::SMonA, Role::AMI, Role::MRA,
                   Role::DbaShop, Role::DbaStation}) {
        if (role_str(r) == role_name) {
            id.role = r;
            found = true;
        }
    }
    if (!found) throw UnknownAgentError("unknown role in agent id '" + s + "'");
    try {
        id.instance = std::stoi(instance);
    } catch (const std::exception&) {
        throw UnknownAgentError("bad instance in agent id '" + s + "'");
    }
    if (at != std::string::npos) id.station = s.substr(at + 1);
    return id;
}

AgentMessage message_from_line(const std::string& line) {
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
        if (c == '|' && cols.size() < 7) {
            cols.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cols.push_back(cur);
    if (cols.size() != 8) throw Error("transcript line needs 8 columns: '" + line + "'");

    AgentMessage m;
    try {
        m.sent_at = std::stoll(cols[0]);
        m.conversation_id = cols[1];
        m.sender = agent_id_from_str(cols[2]);
        m.receiver = agent_id_from_str(cols[3]);
        auto perf = performative_from(cols[4]);
        if (!perf) throw Error("unknown performative '" + cols[4] + "'");
        m.performative = *perf;
        m.seq = std::stoull(cols[5]);
        if (cols[6] != "-") m.in_reply_to = std::stoull(cols[6]);
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error("malformed transcript line: '" + line + "'");
    }
    if (!cols[7].empty()) {
        std::string entry;
        auto flush = [&]() {
            if (entry.empty()) return;
            auto eq = entry.find('=');
            if (eq == std::string::npos) throw Error("bad payload entry '" + entry + "'");
            m.payload[entry.substr(0, eq)] = entry.substr(eq + 1);
            entry.clear();
        };
        for (char c : cols[7]) {
            if (c == ';') flush();
            else entry += c;
        }
        flush();
    }
    return m;
}

std::vector<std::string> op_required_capabilities(const std::string& op) {
    if (op == kOpRetrieveMove) return {"storage", "transport"};
    if (op == kOpMachine) return {"milling"};
    if (op == kOpMoveToAssembly) return {"transport"};
    if (op == kOpAssemble) return {"assembly"};
    if (op == kOpStore) return {"transport", "storage"};
    throw MalformedTaskError("unknown operation '" + op + "'");
}

std::vector<std::string> op_exclusive_resources(const std::string& op) {
    if (op == kOpMachine) return {fms::kResCnc};
    if (op == kOpAssemble) return {fms::kResGlueAssembly, fms::kResLaserQc};
    if (op == kOpRetrieveMove || op == kOpMoveToAssembly || op == kOpStore) return {};
    throw MalformedTaskError("unknown operation '" + op + "'");
}

}  // namespace shopfloor::mes
