#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace shopfloor::petri {

using TimeMs = std::int64_t;

// Colors are flat records: field name -> int or string. An empty record is
// the unit color used by plain resource tokens.
using ColorValue = std::variant<std::int64_t, std::string>;
using Color = std::map<std::string, ColorValue>;

std::string color_value_str(const ColorValue& v);
std::string color_canonical(const Color& c);

struct ColorToken {
    Color color;
    TimeMs timestamp = 0;  // simulated time at which the token is available

    bool operator==(const ColorToken&) const = default;
};

std::string token_canonical(const ColorToken& t);
// Inverse of token_canonical; throws Error on malformed input.
ColorToken token_from_canonical(const std::string& s);

enum class FieldType { Int, Str };

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::Int;
};

// Declared token schema of a place; empty means unit tokens only.
using ColorSet = std::vector<FieldSpec>;

bool conforms(const Color& color, const ColorSet& set);

struct Place {
    std::string id;
    ColorSet color_set;
    std::optional<int> capacity;
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct InputArc {
    std::string place;
    std::string var;  // binding variable the consumed token is bound to
};

// Constructor for one produced token: either a verbatim copy of a bound
// variable's color, field expressions, or a copy with field overrides.
struct TokenSpec {
    std::optional<std::string> copy_var;
    std::vector<std::pair<std::string, ExprPtr>> fields;
};

struct OutputArc {
    std::string place;
    std::vector<TokenSpec> tokens;
};

struct Transition {
    // Extra trace annotation for firings that represent breakdowns/repairs.
    enum class Tag { None, Failure, Repair };

    std::string id;
    std::vector<InputArc> inputs;
    std::vector<OutputArc> outputs;
    ExprPtr guard;   // null means always true
    ExprPtr delay;   // evaluates to ms >= 0; null means 0
    int priority = 0;  // smaller fires first among simultaneous candidates
    Tag tag = Tag::None;
};

struct NetModel {
    std::string name;
    std::vector<Place> places;
    std::vector<Transition> transitions;

    const Place* find_place(const std::string& id) const;
    const Transition* find_transition(const std::string& id) const;
};

struct Diagnostic {
    std::string element;  // offending place/transition/arc
    std::string message;
};

// Structural checks: unique ids, arc endpoints exist, every transition has at
// least one input, expressions only reference bound variables.
std::vector<Diagnostic> validate(const NetModel& net);

struct Marking {
    std::map<std::string, std::vector<ColorToken>> tokens;
    TimeMs clock = 0;

    std::size_t count(const std::string& place) const;
    void insert(const NetModel& net, const std::string& place, ColorToken token);
    // Canonical untimed projection (timestamps and clock dropped), used by the
    // reachability oracle and state-identity checks.
    std::string canonical_untimed() const;
};

enum class EventKind {
    Fire,
    TokenCreated,
    TokenConsumed,
    Failure,
    Repair,
    ExternalCommand,
    ExternalNotify,
    Deadlock,
};

std::string event_kind_str(EventKind k);
std::optional<EventKind> event_kind_from(const std::string& s);

struct SimEvent {
    TimeMs time = 0;
    EventKind kind = EventKind::Fire;
    std::string transition;  // empty when not tied to a firing
    std::map<std::string, std::string> payload;
    std::uint64_t seq = 0;
};

struct EventTrace {
    std::vector<SimEvent> events;

    bool times_monotonic() const;
};

}  // namespace shopfloor::petri
