#pragma once

#include <optional>
#include <string>

#include "shopfloor/bridge/codec.hpp"
#include "shopfloor/mes/system.hpp"
#include "shopfloor/petri/engine.hpp"

namespace shopfloor::bridge {

// Object registry: the simulator-side names MES decisions may target.
bool known_object(const std::string& name);

// Maps an MES dispatch onto the simulator command that unlocks the
// corresponding guarded transition. Throws UnknownObjectError for operations
// or objects outside the registry.
ActionCommand translate_decision(const mes::Dispatch& dispatch);

// Applies an ActionCommand: which authorization place gets which token.
petri::TokenInjection command_to_injection(const ActionCommand& command);

struct TranslatedEvent {
    std::optional<StateUpdate> update;       // recorded in the station database
    std::optional<mes::PlantSignal> signal;  // notified to the owning station's agents
    std::optional<std::string> station;      // owner of the update
};

// Completion/failure/repair firings become agent notifications; start firings
// and token movements become StateUpdates only.
TranslatedEvent translate_event(const petri::SimEvent& event);

// Writes a StateUpdate through to the owning station's database, enforcing
// non-decreasing timestamps per object.
void record_state_update(mes::MesSystem& mes, const std::string& station,
                         const StateUpdate& update);

}  // namespace shopfloor::bridge
