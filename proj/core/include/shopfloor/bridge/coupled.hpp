#pragma once

#include <memory>
#include <vector>

#include "shopfloor/bridge/translate.hpp"
#include "shopfloor/fms/config.hpp"
#include "shopfloor/mes/system.hpp"
#include "shopfloor/petri/engine.hpp"

namespace shopfloor::bridge {

// The coupling hook: between simulator steps it (1) translates fresh plant
// events into station-database updates and agent notifications, (2) drains
// the agent layer until quiescent, (3) turns the resulting dispatches into
// authorization-token injections. Lock-step at every simulator event keeps
// the joint trace in one deterministic total order.
class AgentControllerHook : public petri::RunHooks {
public:
    explicit AgentControllerHook(mes::MesSystem& mes) : mes_(mes) {}

    petri::HookResult on_step(petri::TimeMs now, std::span<const petri::SimEvent> fresh_events,
                              const petri::Marking& marking) override;

    const std::vector<ActionCommand>& commands_issued() const { return commands_; }
    std::size_t signals_delivered() const { return signals_; }

private:
    mes::MesSystem& mes_;
    std::vector<ActionCommand> commands_;
    std::size_t signals_ = 0;
    bool started_ = false;
};

struct CoupledResult {
    petri::EventTrace trace;
    petri::Marking final_marking;
    std::size_t orders_completed = 0;
    std::size_t messages_delivered = 0;
    std::vector<ActionCommand> commands;
    std::optional<std::string> divergence;  // partial trace retained when set
};

// Runs net + agent layer to quiescence (or `until`), returning the joint
// trace. The MesSystem must be initialized against the same FmsConfig that
// built the net.
CoupledResult step_coupled(const petri::NetModel& net, const petri::Marking& initial,
                           mes::MesSystem& mes, petri::TimeMs until, std::uint64_t seed = 0);

}  // namespace shopfloor::bridge
