#pragma once

#include <string>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::bridge {

// Model-exchange format: a net (and optionally an initial marking) as an XML
// document in the same conventions as the wire protocol. Expressions are
// written as their tree form, so loaded models behave identically.
std::string net_to_xml(const petri::NetModel& net, const petri::Marking* initial = nullptr);

struct LoadedModel {
    petri::NetModel net;
    petri::Marking initial;
    bool has_marking = false;
};

LoadedModel net_from_xml(const std::string& bytes);

}  // namespace shopfloor::bridge
