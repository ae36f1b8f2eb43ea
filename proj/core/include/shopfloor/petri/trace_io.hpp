#pragma once

#include <iosfwd>
#include <string>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::petri {

// Line-delimited trace format, one event per line:
//   <time>\t<kind>\t<transition>\t<key>=<value>;<key>=<value>...
// '#' starts a comment line. Values escape '\', ';', '=', tab and newline.
std::string trace_line(const SimEvent& event);
void write_trace(std::ostream& os, const EventTrace& trace);
std::string trace_to_string(const EventTrace& trace);

// Throws Error with a line number on malformed input.
EventTrace read_trace(std::istream& is);
EventTrace trace_from_string(const std::string& text);

}  // namespace shopfloor::petri
