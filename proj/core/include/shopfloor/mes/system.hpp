#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shopfloor/fms/config.hpp"
#include "shopfloor/mes/database.hpp"
#include "shopfloor/mes/ontology.hpp"
#include "shopfloor/mes/types.hpp"

namespace shopfloor::mes {

// Outbound operation dispatch, handed to the bridge by a station AMI.
struct Dispatch {
    std::string task_id;
    std::string conversation_id;
    std::string op;
    std::string station;
    std::int64_t order_id = 0;
    std::optional<std::int64_t> part_id;
    TimeMs issued_at = 0;
};

// Inbound plant observation, delivered through a station AMI.
struct PlantSignal {
    enum class Kind { Completed, Failure, Repair };
    Kind kind = Kind::Completed;
    std::string station;
    std::string op;
    std::int64_t order_id = 0;
    std::optional<std::int64_t> part_id;
    TimeMs time = 0;
};

std::string plant_signal_kind_str(PlantSignal::Kind k);

struct MesTopology {
    std::vector<fms::StationSpec> stations;

    int resource_instance(const std::string& station, const std::string& resource) const;
    AgentId mra(const std::string& station, const std::string& resource) const;
    const fms::StationSpec* station(const std::string& id) const;
};

struct CalendarEntry;

namespace detail {
struct MesState;
}

// Everything an agent may do besides mutating its own state flows through
// here, which keeps handle() a deterministic function of (state, message).
class MesContext {
public:
    explicit MesContext(detail::MesState& state) : state_(state) {}

    TimeMs now() const;
    std::uint64_t send(const AgentId& sender, const AgentId& receiver, Performative p,
                       const std::string& conversation, std::map<std::string, std::string> payload,
                       std::optional<std::uint64_t> reply_to = std::nullopt);
    void push_dispatch(Dispatch d);
    void record_allocation(const Allocation& a);
    void finalize_allocation(const std::string& task_id, TimeMs completion);
    std::map<std::string, std::vector<CalendarEntry>>& calendars();
    Database& shop_db();
    Database& station_db(const std::string& station);
    const MesTopology& topology() const;
    void note_unexpected(const AgentId& agent, const AgentMessage& msg);

private:
    detail::MesState& state_;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual const AgentId& id() const = 0;
    // Deterministic state transition; everything the agent does goes through
    // the context (messages, dispatches). Unexpected performatives are logged
    // and ignored.
    virtual void handle(const AgentMessage& msg, MesContext& ctx) = 0;
    virtual std::string state_summary() const { return {}; }
};

struct StartTaskResult {
    enum class Outcome { Allocated, Deferred, Parked };
    Outcome outcome = Outcome::Deferred;
    std::vector<AgentMessage> transcript;
    std::optional<Allocation> allocation;
};

// Interval bookkeeping used by the allocation calendars.
struct CalendarEntry {
    std::string task_id;
    TimeMs start = 0;
    TimeMs end = 0;
    bool finalized = false;
};

bool calendar_has_overlap(const std::vector<CalendarEntry>& entries, TimeMs start, TimeMs end);

// The manufacturing execution layer: one SMA/AM/SMCA/DBA-shop, one
// SCA/SMonA/AMI/DBA-station per station, one MRA per resource, plus the
// global dispatcher that delivers messages in (time, sender seq, sender id)
// order.
class MesSystem {
public:
    MesSystem(const fms::FmsConfig& config, std::vector<fms::BookOrder> orders);
    ~MesSystem();

    MesSystem(const MesSystem&) = delete;
    MesSystem& operator=(const MesSystem&) = delete;

    // Admits the first wip_limit orders and runs ops until quiescent.
    void start(TimeMs now);
    // Delivers queued messages until quiescent. Throws DivergenceError when
    // more than `budget` messages are delivered within one simulated instant.
    void drain(TimeMs now);
    // Announces a standalone task and runs the allocation conversation.
    StartTaskResult start_new_task(const TaskAnnouncement& task, TimeMs now);
    // Plant observation entering through the owning station's AMI.
    void deliver_plant_signal(const PlantSignal& signal);

    std::vector<Dispatch> take_dispatches();
    bool has_pending_messages() const;

    const std::vector<AgentMessage>& message_log() const;
    const std::vector<Allocation>& allocations() const;
    const std::map<std::string, std::vector<CalendarEntry>>& calendars() const;
    Database& shop_db();
    Database& station_db(const std::string& station);

    std::size_t orders_completed() const;
    std::size_t messages_delivered() const;
    std::uint64_t message_budget() const;
    void set_message_budget(std::uint64_t budget);

    // Test access: summaries of every agent's state, keyed by agent id.
    std::map<std::string, std::string> agent_state_summaries() const;
    // Test access: register an extra agent (e.g. for divergence tests).
    void add_agent_for_test(std::unique_ptr<Agent> agent);
    // Test access: enqueue an arbitrary message as if an agent had sent it.
    void inject_message_for_test(const AgentId& sender, const AgentId& receiver, Performative p,
                                 const std::string& conv,
                                 std::map<std::string, std::string> payload, TimeMs now);

private:
    std::unique_ptr<detail::MesState> state_;
};

}  // namespace shopfloor::mes
