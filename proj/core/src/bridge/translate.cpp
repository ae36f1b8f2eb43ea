#include "shopfloor/bridge/translate.hpp"

#include "shopfloor/errors.hpp"
#include "shopfloor/fms/model.hpp"

namespace shopfloor::bridge {

namespace {

struct OpWire {
    const char* op;
    const char* target;
    const char* action;
    bool part_scoped;  // parameter is PART-ID, otherwise ORDER only
};

// Dispatch vocabulary: operation -> (object, action, parameter shape).
constexpr OpWire kOpWire[] = {
    {mes::kOpMachine, "CNC", "start-machining", true},
    {mes::kOpAssemble, "GLUE-ASSEMBLY", "start-assembly", false},
    {mes::kOpRetrieveMove, "ASRS", "retrieve-part", true},
    {mes::kOpMoveToAssembly, "CONVEYOR", "move-to-assembly", true},
    {mes::kOpStore, "ASRS", "store-product", false},
};

const OpWire* wire_for_op(const std::string& op) {
    for (const auto& w : kOpWire)
        if (op == w.op) return &w;
    return nullptr;
}

const OpWire* wire_for_command(const std::string& target, const std::string& action) {
    for (const auto& w : kOpWire)
        if (target == w.target && action == w.action) return &w;
    return nullptr;
}

// Authorization place per operation.
const char* auth_place(const std::string& op) {
    if (op == mes::kOpMachine) return fms::kPlaceAuthMachine;
    if (op == mes::kOpAssemble) return fms::kPlaceAuthAssemble;
    if (op == mes::kOpRetrieveMove) return fms::kPlaceAuthRetrieve;
    if (op == mes::kOpMoveToAssembly) return fms::kPlaceAuthMove2;
    if (op == mes::kOpStore) return fms::kPlaceAuthStore;
    throw UnknownObjectError("no authorization place for op '" + op + "'");
}

struct Completion {
    const char* transition;
    const char* op;
    const char* station;
    const char* object;
};

constexpr Completion kCompletions[] = {
    {fms::kTRetrieveDone, mes::kOpRetrieveMove, fms::kStationAsrs, "CONVEYOR"},
    {fms::kTMachineDone, mes::kOpMachine, fms::kStationMachining, "CNC"},
    {fms::kTMove2Done, mes::kOpMoveToAssembly, fms::kStationAsrs, "CONVEYOR"},
    {fms::kTAssembleDone, mes::kOpAssemble, fms::kStationAssembly, "GLUE-ASSEMBLY"},
    {fms::kTStoreDone, mes::kOpStore, fms::kStationAsrs, "ASRS"},
};

struct StartInfo {
    const char* transition;
    const char* object;
    const char* state;
    const char* station;
};

constexpr StartInfo kStarts[] = {
    {fms::kTRetrieveStart, "CONVEYOR", "moving", fms::kStationAsrs},
    {fms::kTMachineStart, "CNC", "machining", fms::kStationMachining},
    {fms::kTMove2Start, "CONVEYOR", "moving", fms::kStationAsrs},
    {fms::kTAssembleStart, "GLUE-ASSEMBLY", "assembling", fms::kStationAssembly},
    {fms::kTStoreStart, "ASRS", "storing", fms::kStationAsrs},
};

std::optional<std::int64_t> payload_int(const petri::SimEvent& ev, const char* key) {
    auto it = ev.payload.find(key);
    if (it == ev.payload.end()) return std::nullopt;
    return std::stoll(it->second);
}

// The binding variable holding part/order context differs per transition:
// consumed part tokens bind to "p", order-scoped tokens to "x" or "a".
std::optional<std::int64_t> event_order(const petri::SimEvent& ev) {
    for (const char* key : {"p.order", "x.order", "a.order"}) {
        if (auto v = payload_int(ev, key)) return v;
    }
    return std::nullopt;
}

std::optional<std::int64_t> event_part(const petri::SimEvent& ev) {
    for (const char* key : {"p.part_id", "a.part_id"}) {
        if (auto v = payload_int(ev, key)) return v;
    }
    return std::nullopt;
}

}  // namespace

void record_state_update(mes::MesSystem& mes, const std::string& station,
                         const StateUpdate& update) {
    auto& db = mes.station_db(station);
    const std::string key = "state/" + update.object;
    if (const auto* prev = db.query(key)) {
        // Per-object update streams are monotone in time.
        if (prev->last_updated > update.timestamp)
            throw Error("state update for " + update.object + " moves backwards in time");
    }
    std::map<std::string, std::string> value;
    value["state"] = update.state;
    value["time"] = std::to_string(update.timestamp);
    for (const auto& [k, v] : update.payload) value["payload." + k] = v;
    db.write(key, std::move(value), update.timestamp);
}

bool known_object(const std::string& name) {
    for (const char* obj : {"CNC", "ASRS", "CONVEYOR", "GLUE-ASSEMBLY", "ROBOT", "LASER-QC"})
        if (name == obj) return true;
    return false;
}

ActionCommand translate_decision(const mes::Dispatch& dispatch) {
    const OpWire* wire = wire_for_op(dispatch.op);
    if (!wire) throw UnknownObjectError("dispatch names unknown operation '" + dispatch.op + "'");
    ActionCommand cmd;
    cmd.target = wire->target;
    cmd.action = wire->action;
    cmd.issued_at = dispatch.issued_at;
    cmd.params["ORDER"] = std::to_string(dispatch.order_id);
    if (wire->part_scoped) {
        if (!dispatch.part_id)
            throw UnknownObjectError("dispatch for '" + dispatch.op + "' lacks a part id");
        cmd.params["PART-ID"] = std::to_string(*dispatch.part_id);
    }
    cmd.params["TASK"] = dispatch.task_id;
    return cmd;
}

petri::TokenInjection command_to_injection(const ActionCommand& command) {
    if (!known_object(command.target))
        throw UnknownObjectError("command targets unknown object '" + command.target + "'");
    const OpWire* wire = wire_for_command(command.target, command.action);
    if (!wire)
        throw UnknownObjectError("no action '" + command.action + "' on object '" + command.target +
                                 "'");
    petri::TokenInjection inj;
    inj.place = auth_place(wire->op);
    inj.source = "mes";
    if (wire->part_scoped) {
        auto it = command.params.find("PART-ID");
        if (it == command.params.end())
            throw UnknownObjectError("command for '" + command.action + "' lacks PART-ID");
        inj.token = fms::auth_part_token(std::stoll(it->second));
    } else {
        auto it = command.params.find("ORDER");
        if (it == command.params.end())
            throw UnknownObjectError("command for '" + command.action + "' lacks ORDER");
        inj.token = fms::auth_order_token(std::stoll(it->second));
    }
    return inj;
}

TranslatedEvent translate_event(const petri::SimEvent& event) {
    TranslatedEvent out;
    using petri::EventKind;

    if (event.kind == EventKind::Failure || event.kind == EventKind::Repair) {
        mes::PlantSignal s;
        s.kind = event.kind == EventKind::Failure ? mes::PlantSignal::Kind::Failure
                                                  : mes::PlantSignal::Kind::Repair;
        s.station = fms::kStationMachining;
        s.op = mes::kOpMachine;
        s.order_id = event_order(event).value_or(0);
        s.part_id = event_part(event);
        s.time = event.time;
        out.signal = s;

        StateUpdate u;
        u.object = "CNC";
        u.state = event.kind == EventKind::Failure ? "failed" : "repaired";
        u.timestamp = event.time;
        out.update = u;
        out.station = fms::kStationMachining;
        return out;
    }

    if (event.kind == EventKind::Fire) {
        for (const auto& c : kCompletions) {
            if (event.transition != c.transition) continue;
            mes::PlantSignal s;
            s.kind = mes::PlantSignal::Kind::Completed;
            s.station = c.station;
            s.op = c.op;
            s.order_id = event_order(event).value_or(0);
            s.part_id = event_part(event);
            s.time = event.time;
            out.signal = s;

            StateUpdate u;
            u.object = c.object;
            u.state = "idle";
            u.timestamp = event.time;
            u.payload = event.payload;
            out.update = u;
            out.station = c.station;
            return out;
        }
        for (const auto& st : kStarts) {
            if (event.transition != st.transition) continue;
            StateUpdate u;
            u.object = st.object;
            u.state = st.state;
            u.timestamp = event.time;
            u.payload = event.payload;
            out.update = u;
            out.station = st.station;
            return out;
        }
        return out;  // bookkeeping transition: nothing to report
    }

    if (event.kind == EventKind::TokenCreated || event.kind == EventKind::TokenConsumed) {
        // Buffer movements: recorded, never notified. Control-plane places
        // (authorizations, rng) stay out of the databases.
        auto it = event.payload.find("place");
        if (it == event.payload.end()) return out;
        const std::string& place = it->second;
        if (place.rfind("auth_", 0) == 0 || place == fms::kPlaceRng) return out;
        StateUpdate u;
        u.object = place;
        u.state = event.kind == EventKind::TokenCreated ? "token-in" : "token-out";
        u.timestamp = event.time;
        u.payload = event.payload;
        out.update = u;
        if (place.rfind("s1", 0) == 0 || place == fms::kPlaceMachining ||
            place == fms::kPlaceRepairing)
            out.station = fms::kStationMachining;
        else if (place.rfind("s2", 0) == 0 || place == fms::kPlaceAssembling)
            out.station = fms::kStationAssembly;
        else
            out.station = fms::kStationAsrs;
        return out;
    }
    return out;
}

}  // namespace shopfloor::bridge
