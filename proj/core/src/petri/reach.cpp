#include "shopfloor/petri/reach.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/expr.hpp"

namespace shopfloor::petri {

namespace {

// Untimed state: place -> multiset of colors. Tokens are plain colors; order
// within a place is kept sorted so states compare structurally.
using UState = std::map<std::string, std::vector<Color>>;

UState strip_time(const Marking& m) {
    UState s;
    for (const auto& [place, vec] : m.tokens) {
        for (const auto& tok : vec) s[place].push_back(tok.color);
    }
    for (auto& [place, colors] : s) {
        std::sort(colors.begin(), colors.end(), [](const Color& a, const Color& b) {
            return color_canonical(a) < color_canonical(b);
        });
    }
    return s;
}

std::string canonical(const UState& s) {
    std::string out;
    for (const auto& [place, colors] : s) {
        if (colors.empty()) continue;
        out += place + ":[";
        for (std::size_t i = 0; i < colors.size(); ++i) {
            if (i) out += ",";
            out += color_canonical(colors[i]);
        }
        out += "];";
    }
    return out;
}

// Enumerates every guard-satisfying assignment of distinct tokens to input
// arcs by plain cartesian product — deliberately simple-minded.
void for_each_binding(const Transition& t, const UState& s,
                      const std::function<void(const std::vector<std::size_t>&)>& emit) {
    const std::size_t n = t.inputs.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<ColorToken> bound_tokens(n);

    std::function<void(std::size_t)> descend = [&](std::size_t arc) {
        if (arc == n) {
            if (t.guard) {
                Expr::Env env;
                for (std::size_t i = 0; i < n; ++i) env.set(t.inputs[i].var, &bound_tokens[i]);
                if (!t.guard->eval_bool(env)) return;
            }
            emit(idx);
            return;
        }
        auto it = s.find(t.inputs[arc].place);
        if (it == s.end()) return;
        for (std::size_t k = 0; k < it->second.size(); ++k) {
            bool taken = false;
            for (std::size_t prev = 0; prev < arc; ++prev)
                if (t.inputs[prev].place == t.inputs[arc].place && idx[prev] == k) taken = true;
            if (taken) continue;
            idx[arc] = k;
            bound_tokens[arc] = ColorToken{it->second[k], 0};
            descend(arc + 1);
        }
    };
    descend(0);
}

UState apply(const Transition& t, const UState& s, const std::vector<std::size_t>& idx) {
    Expr::Env env;
    std::vector<ColorToken> bound(t.inputs.size());
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        bound[i] = ColorToken{s.at(t.inputs[i].place)[idx[i]], 0};
        env.set(t.inputs[i].var, &bound[i]);
    }

    UState next = s;
    std::vector<std::pair<std::string, std::size_t>> removals;
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
        removals.emplace_back(t.inputs[i].place, idx[i]);
    std::sort(removals.begin(), removals.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    for (const auto& [place, k] : removals) {
        auto& vec = next[place];
        vec.erase(vec.begin() + static_cast<std::ptrdiff_t>(k));
    }
    for (const auto& out : t.outputs) {
        for (const auto& spec : out.tokens) {
            Color color;
            if (spec.copy_var) color = env.find(*spec.copy_var)->color;
            for (const auto& [name, e] : spec.fields) color[name] = e->eval(env);
            next[out.place].push_back(std::move(color));
        }
    }
    for (auto& [place, colors] : next) {
        std::sort(colors.begin(), colors.end(), [](const Color& a, const Color& b) {
            return color_canonical(a) < color_canonical(b);
        });
    }
    return next;
}

}  // namespace

ReachResult reachable_markings(const NetModel& net, const Marking& initial, std::size_t bound) {
    const auto diagnostics = validate(net);
    if (!diagnostics.empty())
        throw MalformedNetError("net '" + net.name + "' failed validation: " +
                                diagnostics.front().element + ": " + diagnostics.front().message);

    ReachResult result;
    std::deque<UState> frontier;
    UState init = strip_time(initial);
    result.markings.insert(canonical(init));
    frontier.push_back(std::move(init));

    while (!frontier.empty()) {
        UState state = std::move(frontier.front());
        frontier.pop_front();
        for (const auto& t : net.transitions) {
            for_each_binding(t, state, [&](const std::vector<std::size_t>& idx) {
                UState next = apply(t, state, idx);
                std::string key = canonical(next);
                if (result.markings.insert(std::move(key)).second) {
                    if (result.markings.size() > bound)
                        throw BoundExceededError("reachability bound " + std::to_string(bound) +
                                                 " exceeded for net '" + net.name + "'");
                    frontier.push_back(std::move(next));
                }
            });
        }
    }
    return result;
}

}  // namespace shopfloor::petri
