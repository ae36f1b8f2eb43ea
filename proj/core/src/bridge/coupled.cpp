#include "shopfloor/bridge/coupled.hpp"

#include "shopfloor/errors.hpp"

namespace shopfloor::bridge {

petri::HookResult AgentControllerHook::on_step(petri::TimeMs now,
                                               std::span<const petri::SimEvent> fresh_events,
                                               const petri::Marking&) {
    petri::HookResult result;

    for (const auto& ev : fresh_events) {
        TranslatedEvent t = translate_event(ev);
        if (t.update && t.station) record_state_update(mes_, *t.station, *t.update);
        if (t.signal) {
            mes_.deliver_plant_signal(*t.signal);
            ++signals_;
            petri::NotifyRecord record;
            record["kind"] = mes::plant_signal_kind_str(t.signal->kind);
            record["station"] = t.signal->station;
            record["op"] = t.signal->op;
            record["order"] = std::to_string(t.signal->order_id);
            if (t.signal->part_id) record["part_id"] = std::to_string(*t.signal->part_id);
            result.notifications.push_back(std::move(record));
        }
    }

    if (!started_) {
        started_ = true;
        mes_.start(now);
    } else {
        mes_.drain(now);
    }

    for (const auto& dispatch : mes_.take_dispatches()) {
        ActionCommand cmd = translate_decision(dispatch);
        petri::TokenInjection inj = command_to_injection(cmd);
        commands_.push_back(std::move(cmd));
        result.commands.push_back(std::move(inj));
    }
    return result;
}

CoupledResult step_coupled(const petri::NetModel& net, const petri::Marking& initial,
                           mes::MesSystem& mes, petri::TimeMs until, std::uint64_t seed) {
    AgentControllerHook hook(mes);
    petri::RunOptions options;
    options.horizon = until;
    options.seed = seed;
    auto kernel = petri::run(net, initial, options, &hook);

    CoupledResult out;
    out.trace = std::move(kernel.trace);
    out.final_marking = std::move(kernel.final_marking);
    out.orders_completed = mes.orders_completed();
    out.messages_delivered = mes.messages_delivered();
    out.commands = hook.commands_issued();
    out.divergence = std::move(kernel.divergence);
    return out;
}

}  // namespace shopfloor::bridge
