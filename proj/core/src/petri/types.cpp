#include "shopfloor/petri/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/expr.hpp"

namespace shopfloor::petri {

std::string color_value_str(const ColorValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return std::get<std::string>(v);
}

std::string color_canonical(const Color& c) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : c) {
        if (!first) out += ",";
        first = false;
        out += k;
        out += "=";
        if (std::holds_alternative<std::string>(v)) {
            out += "'" + std::get<std::string>(v) + "'";
        } else {
            out += std::to_string(std::get<std::int64_t>(v));
        }
    }
    out += "}";
    return out;
}

std::string token_canonical(const ColorToken& t) {
    return color_canonical(t.color) + "@" + std::to_string(t.timestamp);
}

ColorToken token_from_canonical(const std::string& s) {
    auto fail = [&]() -> Error { return Error("malformed canonical token '" + s + "'"); };
    std::size_t i = 0;
    auto expect = [&](char c) {
        if (i >= s.size() || s[i] != c) throw fail();
        ++i;
    };
    ColorToken token;
    expect('{');
    while (i < s.size() && s[i] != '}') {
        std::string key;
        while (i < s.size() && s[i] != '=') key += s[i++];
        expect('=');
        if (i < s.size() && s[i] == '\'') {
            ++i;
            std::string value;
            while (i < s.size() && s[i] != '\'') value += s[i++];
            expect('\'');
            token.color[key] = value;
        } else {
            std::string digits;
            while (i < s.size() && (s[i] == '-' || (s[i] >= '0' && s[i] <= '9'))) digits += s[i++];
            if (digits.empty()) throw fail();
            token.color[key] = static_cast<std::int64_t>(std::stoll(digits));
        }
        if (i < s.size() && s[i] == ',') ++i;
    }
    expect('}');
    expect('@');
    if (i >= s.size()) throw fail();
    token.timestamp = std::stoll(s.substr(i));
    return token;
}

bool conforms(const Color& color, const ColorSet& set) {
    if (color.size() != set.size()) return false;
    for (const auto& f : set) {
        auto it = color.find(f.name);
        if (it == color.end()) return false;
        const bool is_int = std::holds_alternative<std::int64_t>(it->second);
        if (f.type == FieldType::Int && !is_int) return false;
        if (f.type == FieldType::Str && is_int) return false;
    }
    return true;
}

const Place* NetModel::find_place(const std::string& id) const {
    for (const auto& p : places)
        if (p.id == id) return &p;
    return nullptr;
}

const Transition* NetModel::find_transition(const std::string& id) const {
    for (const auto& t : transitions)
        if (t.id == id) return &t;
    return nullptr;
}

namespace {

void check_expr_vars(const ExprPtr& e, const std::set<std::string>& bound,
                     const std::string& element, const char* what,
                     std::vector<Diagnostic>& out) {
    if (!e) return;
    std::vector<std::string> vars;
    e->collect_vars(vars);
    for (const auto& v : vars) {
        if (!bound.count(v)) {
            out.push_back({element, std::string(what) + " references unbound variable '" + v + "'"});
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate(const NetModel& net) {
    std::vector<Diagnostic> out;

    std::set<std::string> place_ids;
    for (const auto& p : net.places) {
        if (!place_ids.insert(p.id).second)
            out.push_back({p.id, "duplicate place id"});
        std::set<std::string> fields;
        for (const auto& f : p.color_set) {
            if (!fields.insert(f.name).second)
                out.push_back({p.id, "duplicate color-set field '" + f.name + "'"});
        }
        if (p.capacity && *p.capacity < 0)
            out.push_back({p.id, "negative capacity"});
    }

    std::set<std::string> transition_ids;
    for (const auto& t : net.transitions) {
        if (!transition_ids.insert(t.id).second)
            out.push_back({t.id, "duplicate transition id"});
        if (t.inputs.empty())
            out.push_back({t.id, "no input arcs"});

        std::set<std::string> bound;
        for (const auto& in : t.inputs) {
            if (!place_ids.count(in.place))
                out.push_back({t.id, "input arc references missing place '" + in.place + "'"});
            if (in.var.empty())
                out.push_back({t.id, "input arc with empty variable name"});
            else if (!bound.insert(in.var).second)
                out.push_back({t.id, "duplicate binding variable '" + in.var + "'"});
        }
        check_expr_vars(t.guard, bound, t.id, "guard", out);
        check_expr_vars(t.delay, bound, t.id, "delay", out);
        for (const auto& o : t.outputs) {
            if (!place_ids.count(o.place))
                out.push_back({t.id, "output arc references missing place '" + o.place + "'"});
            for (const auto& spec : o.tokens) {
                if (spec.copy_var && !bound.count(*spec.copy_var))
                    out.push_back({t.id, "token copies unbound variable '" + *spec.copy_var + "'"});
                for (const auto& [name, e] : spec.fields)
                    check_expr_vars(e, bound, t.id, ("token field '" + name + "'").c_str(), out);
            }
        }
    }
    return out;
}

std::size_t Marking::count(const std::string& place) const {
    auto it = tokens.find(place);
    return it == tokens.end() ? 0 : it->second.size();
}

void Marking::insert(const NetModel& net, const std::string& place, ColorToken token) {
    const Place* p = net.find_place(place);
    if (!p) throw MalformedNetError("insert into unknown place '" + place + "'");
    if (token.timestamp < 0) throw CapacityError("token timestamp < 0 in '" + place + "'");
    if (!conforms(token.color, p->color_set))
        throw CapacityError("token " + token_canonical(token) +
                            " does not conform to color set of '" + place + "'");
    auto& vec = tokens[place];
    if (p->capacity && vec.size() + 1 > static_cast<std::size_t>(*p->capacity))
        throw CapacityError("capacity of place '" + place + "' exceeded");
    vec.push_back(std::move(token));
}

std::string Marking::canonical_untimed() const {
    std::ostringstream os;
    for (const auto& [place, vec] : tokens) {
        if (vec.empty()) continue;
        std::vector<std::string> colors;
        colors.reserve(vec.size());
        for (const auto& t : vec) colors.push_back(color_canonical(t.color));
        std::sort(colors.begin(), colors.end());
        os << place << ":[";
        for (std::size_t i = 0; i < colors.size(); ++i) {
            if (i) os << ",";
            os << colors[i];
        }
        os << "];";
    }
    return os.str();
}

std::string event_kind_str(EventKind k) {
    switch (k) {
        case EventKind::Fire: return "fire";
        case EventKind::TokenCreated: return "token-created";
        case EventKind::TokenConsumed: return "token-consumed";
        case EventKind::Failure: return "failure";
        case EventKind::Repair: return "repair";
        case EventKind::ExternalCommand: return "external-command";
        case EventKind::ExternalNotify: return "external-notify";
        case EventKind::Deadlock: return "deadlock";
    }
    return "?";
}

std::optional<EventKind> event_kind_from(const std::string& s) {
    if (s == "fire") return EventKind::Fire;
    if (s == "token-created") return EventKind::TokenCreated;
    if (s == "token-consumed") return EventKind::TokenConsumed;
    if (s == "failure") return EventKind::Failure;
    if (s == "repair") return EventKind::Repair;
    if (s == "external-command") return EventKind::ExternalCommand;
    if (s == "external-notify") return EventKind::ExternalNotify;
    if (s == "deadlock") return EventKind::Deadlock;
    return std::nullopt;
}

bool EventTrace::times_monotonic() const {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].time < events[i - 1].time) return false;
    return true;
}

}  // namespace shopfloor::petri
