#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::petri {

// One enabled (transition, binding) candidate. token_idx[i] indexes the token
// (within its place's vector) consumed by input arc i. enabling_time is
// max(marking.clock, latest consumed-token timestamp): the earliest instant
// the firing is feasible.
struct Binding {
    const Transition* transition = nullptr;
    std::vector<std::size_t> token_idx;
    TimeMs enabling_time = 0;
    std::string canonical;  // transition id + var=token list, total order key
};

// All enabled bindings, sorted by (enabling_time, priority, canonical,
// enumeration order). Throws MalformedNetError when the net does not
// validate cleanly.
std::vector<Binding> enabled_bindings(const NetModel& net, const Marking& marking);

struct FireResult {
    Marking marking;
    std::vector<SimEvent> events;
};

// Fires (transition, binding) at marking.clock. Inputs are removed, outputs
// created at clock + delay(binding). Throws NotEnabledError when the binding
// is not enabled at the current clock.
FireResult fire(const NetModel& net, const Marking& marking, const Transition& transition,
                const std::vector<std::size_t>& token_idx);

struct AdvanceResult {
    enum class Status { Advanced, AlreadyEnabled, Deadlock };
    Status status = Status::Deadlock;
    Marking marking;
};

// Moves the clock to the earliest enabling time among enabled bindings.
// Deadlock is a distinguished outcome, not an error.
AdvanceResult advance(const NetModel& net, const Marking& marking);

// External command applied between steps: inject one token into a place.
struct TokenInjection {
    std::string place;
    ColorToken token;
    std::string source;  // recorded in the external-command event
};

// Notification crossing the bridge in the other direction; logged as an
// external-notify event.
using NotifyRecord = std::map<std::string, std::string>;

struct HookResult {
    std::vector<TokenInjection> commands;
    std::vector<NotifyRecord> notifications;
};

// Consulted between engine steps. fresh_events covers everything emitted
// since the previous consultation.
class RunHooks {
public:
    virtual ~RunHooks() = default;
    virtual HookResult on_step(TimeMs now, std::span<const SimEvent> fresh_events,
                               const Marking& marking) {
        (void)now;
        (void)fresh_events;
        (void)marking;
        return {};
    }
};

struct RunOptions {
    TimeMs horizon = 0;          // firings beyond this instant are not taken
    std::uint64_t seed = 0;      // run identity for reproduction records;
                                 // stochastic nets keep generator state in tokens
    bool emit_token_events = true;
    // Guard against zero-delay cycles: a run that exceeds this many firings
    // throws DivergenceError. 0 disables the check.
    std::uint64_t max_steps = 50'000'000;
};

struct RunResultKernel {
    EventTrace trace;
    Marking final_marking;
    bool deadlocked = false;  // quiescent before the horizon
    // Set when the run was cut short by a divergence (hook message budget or
    // max_steps); the trace up to that point is retained for diagnosis.
    std::optional<std::string> divergence;
};

// Deterministic event-driven run: repeatedly fires the first enabled binding
// in the (enabling_time, priority, canonical, sequence) order, consulting
// hooks between steps. Identical (net, initial, options, hook inputs) yield
// identical traces.
RunResultKernel run(const NetModel& net, const Marking& initial, const RunOptions& options,
                    RunHooks* hooks = nullptr);

struct TransitionPlan;

// Incremental form of run() used by the coupled bridge: owns marking + trace.
class Engine {
public:
    Engine(const NetModel& net, Marking initial, RunOptions options);
    ~Engine();

    // Fires or advances at most one step; returns false when quiescent or the
    // horizon is reached. Newly emitted events accumulate in trace().
    bool step();
    void apply(const TokenInjection& cmd);
    void log_notify(const NotifyRecord& record);
    void note_deadlock();

    const Marking& marking() const { return marking_; }
    TimeMs clock() const { return marking_.clock; }
    const EventTrace& trace() const { return trace_; }
    EventTrace take_trace() { return std::move(trace_); }
    std::size_t events_emitted() const { return trace_.events.size(); }
    bool horizon_reached() const { return horizon_reached_; }

private:
    struct Cand {
        std::vector<std::size_t> token_idx;
        TimeMs token_time = 0;
    };

    std::optional<Binding> first_candidate();
    void mark_dirty_around(std::size_t transition_idx);

    const NetModel& net_;
    Marking marking_;
    RunOptions options_;
    EventTrace trace_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t fired_ = 0;
    bool horizon_reached_ = false;

    // Per-transition candidate cache, invalidated only when one of the
    // transition's input places changes.
    std::vector<std::vector<Cand>> cache_;
    std::vector<TransitionPlan> plans_;
    std::vector<bool> dirty_;
    std::map<std::string, std::vector<std::size_t>> consumers_;  // place -> transitions
    std::vector<std::vector<std::size_t>> affected_;             // transition -> transitions
};

}  // namespace shopfloor::petri
