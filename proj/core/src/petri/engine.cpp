#include "shopfloor/petri/engine.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/expr.hpp"

namespace shopfloor::petri {

// Per-transition enumeration plan: conjuncts of the guard are applied as soon
// as all their variables are bound, which prunes the candidate product early.
struct ArcPlan {
    std::vector<const Expr*> checks;  // conjuncts fully bound after this arc
};

struct TransitionPlan {
    std::vector<ArcPlan> arcs;
    std::vector<ExprPtr> all_conjuncts;
};

namespace {

const std::vector<ColorToken> kNoTokens;

const std::vector<ColorToken>& place_tokens(const Marking& m, const std::string& place) {
    auto it = m.tokens.find(place);
    return it == m.tokens.end() ? kNoTokens : it->second;
}

TransitionPlan make_plan(const Transition& t) {
    TransitionPlan plan;
    plan.arcs.resize(t.inputs.size());
    Expr::conjuncts(t.guard, plan.all_conjuncts);

    std::vector<std::string> bound;
    std::vector<bool> used(plan.all_conjuncts.size(), false);
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        bound.push_back(t.inputs[i].var);
        for (std::size_t c = 0; c < plan.all_conjuncts.size(); ++c) {
            if (used[c]) continue;
            std::vector<std::string> vars;
            plan.all_conjuncts[c]->collect_vars(vars);
            bool ok = true;
            for (const auto& v : vars)
                if (std::find(bound.begin(), bound.end(), v) == bound.end()) ok = false;
            if (ok) {
                used[c] = true;
                plan.arcs[i].checks.push_back(plan.all_conjuncts[c].get());
            }
        }
    }
    return plan;
}

std::string binding_canonical(const Transition& t, const Marking& m,
                              const std::vector<std::size_t>& idx) {
    std::string out = t.id;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        const auto& tok = place_tokens(m, t.inputs[i].place)[idx[i]];
        out += ";";
        out += t.inputs[i].var;
        out += "=";
        out += token_canonical(tok);
    }
    return out;
}

void enumerate_transition_planned(const TransitionPlan& plan, const Transition& t,
                                  const Marking& m,
                                  const std::function<void(std::vector<std::size_t>&, TimeMs)>& emit) {
    const std::size_t n = t.inputs.size();
    std::vector<std::size_t> idx(n, 0);
    Expr::Env env;

    // Recursive descent over arcs; same-place arcs must bind distinct tokens.
    std::function<void(std::size_t)> descend = [&](std::size_t arc) {
        if (arc == n) {
            TimeMs et = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& tok = place_tokens(m, t.inputs[i].place)[idx[i]];
                et = std::max(et, tok.timestamp);
            }
            emit(idx, et);
            return;
        }
        const auto& tokens = place_tokens(m, t.inputs[arc].place);
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            bool taken = false;
            for (std::size_t prev = 0; prev < arc; ++prev) {
                if (t.inputs[prev].place == t.inputs[arc].place && idx[prev] == k) {
                    taken = true;
                    break;
                }
            }
            if (taken) continue;
            idx[arc] = k;
            env.set(t.inputs[arc].var, &tokens[k]);
            bool pass = true;
            for (const Expr* check : plan.arcs[arc].checks) {
                if (!check->eval_bool(env)) {
                    pass = false;
                    break;
                }
            }
            if (pass) descend(arc + 1);
        }
        env.erase(t.inputs[arc].var);
    };
    descend(0);
}

void enumerate_transition(const NetModel&, const Transition& t, const Marking& m,
                          const std::function<void(std::vector<std::size_t>&, TimeMs)>& emit) {
    enumerate_transition_planned(make_plan(t), t, m, emit);
}

std::vector<Binding> collect_bindings(const NetModel& net, const Marking& marking) {
    std::vector<Binding> out;
    for (const auto& t : net.transitions) {
        enumerate_transition(net, t, marking, [&](std::vector<std::size_t>& idx, TimeMs token_time) {
            Binding b;
            b.transition = &t;
            b.token_idx = idx;
            b.enabling_time = std::max(marking.clock, token_time);
            out.push_back(std::move(b));
        });
    }
    return out;
}

void sort_bindings(std::vector<Binding>& bindings, const Marking& marking) {
    for (auto& b : bindings)
        b.canonical = binding_canonical(*b.transition, marking, b.token_idx);
    std::stable_sort(bindings.begin(), bindings.end(), [](const Binding& a, const Binding& b) {
        if (a.enabling_time != b.enabling_time) return a.enabling_time < b.enabling_time;
        if (a.transition->priority != b.transition->priority)
            return a.transition->priority < b.transition->priority;
        return a.canonical < b.canonical;
    });
}

}  // namespace

std::vector<Binding> enabled_bindings(const NetModel& net, const Marking& marking) {
    const auto diagnostics = validate(net);
    if (!diagnostics.empty())
        throw MalformedNetError("net '" + net.name + "' failed validation: " +
                                diagnostics.front().element + ": " + diagnostics.front().message);
    auto bindings = collect_bindings(net, marking);
    sort_bindings(bindings, marking);
    return bindings;
}

namespace {

void append_binding_payload(const Transition& t, const Marking& m,
                            const std::vector<std::size_t>& idx,
                            std::map<std::string, std::string>& payload) {
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        const auto& tok = place_tokens(m, t.inputs[i].place)[idx[i]];
        for (const auto& [k, v] : tok.color)
            payload[t.inputs[i].var + "." + k] = color_value_str(v);
    }
}

std::vector<SimEvent> fire_in_place(const NetModel& net, Marking& marking, const Transition& t,
                                    const std::vector<std::size_t>& token_idx,
                                    bool emit_token_events, std::uint64_t* seq_counter) {
    if (token_idx.size() != t.inputs.size())
        throw NotEnabledError("binding arity mismatch for '" + t.id + "'");

    Expr::Env env;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        const auto& tokens = place_tokens(marking, t.inputs[i].place);
        if (token_idx[i] >= tokens.size())
            throw NotEnabledError("binding for '" + t.id + "' names a missing token");
        env.set(t.inputs[i].var, &tokens[token_idx[i]]);
    }
    if (t.guard && !t.guard->eval_bool(env))
        throw NotEnabledError("guard of '" + t.id + "' is false for this binding");

    TimeMs token_time = 0;
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
        token_time = std::max(token_time, env.find(t.inputs[i].var)->timestamp);
    if (token_time > marking.clock)
        throw NotEnabledError("binding for '" + t.id + "' is enabled only at t=" +
                              std::to_string(token_time));

    const TimeMs delay = t.delay ? t.delay->eval_int(env) : 0;
    if (delay < 0) throw EvalError("negative delay for '" + t.id + "'");
    const TimeMs now = marking.clock;

    std::vector<SimEvent> events;
    std::uint64_t local_seq = seq_counter ? *seq_counter : 0;
    auto push_event = [&](EventKind kind, std::map<std::string, std::string> payload) {
        SimEvent ev;
        ev.time = now;
        ev.kind = kind;
        ev.transition = t.id;
        ev.payload = std::move(payload);
        ev.seq = local_seq++;
        events.push_back(std::move(ev));
    };

    std::map<std::string, std::string> fire_payload;
    fire_payload["delay_ms"] = std::to_string(delay);
    append_binding_payload(t, marking, token_idx, fire_payload);
    push_event(EventKind::Fire, fire_payload);
    if (t.tag == Transition::Tag::Failure) push_event(EventKind::Failure, fire_payload);
    if (t.tag == Transition::Tag::Repair) push_event(EventKind::Repair, fire_payload);

    // Evaluate outputs against the pre-removal environment, then mutate.
    struct Produced {
        std::string place;
        ColorToken token;
    };
    std::vector<Produced> produced;
    for (const auto& out : t.outputs) {
        for (const auto& spec : out.tokens) {
            ColorToken tok;
            if (spec.copy_var) tok.color = env.find(*spec.copy_var)->color;
            for (const auto& [name, e] : spec.fields) tok.color[name] = e->eval(env);
            tok.timestamp = now + delay;
            produced.push_back({out.place, std::move(tok)});
        }
    }

    // Remove consumed tokens, highest index first per place.
    std::vector<std::pair<std::string, std::size_t>> removals;
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
        removals.emplace_back(t.inputs[i].place, token_idx[i]);
    std::sort(removals.begin(), removals.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    for (const auto& [place, k] : removals) {
        auto& vec = marking.tokens[place];
        if (emit_token_events) {
            std::map<std::string, std::string> p;
            p["place"] = place;
            p["token"] = token_canonical(vec[k]);
            push_event(EventKind::TokenConsumed, std::move(p));
        }
        vec.erase(vec.begin() + static_cast<std::ptrdiff_t>(k));
    }

    for (auto& pr : produced) {
        if (emit_token_events) {
            std::map<std::string, std::string> p;
            p["place"] = pr.place;
            p["token"] = token_canonical(pr.token);
            push_event(EventKind::TokenCreated, std::move(p));
        }
        marking.insert(net, pr.place, std::move(pr.token));
    }

    if (seq_counter) *seq_counter = local_seq;
    return events;
}

FireResult fire_impl(const NetModel& net, const Marking& marking, const Transition& t,
                     const std::vector<std::size_t>& token_idx, bool emit_token_events,
                     std::uint64_t* seq_counter) {
    FireResult result;
    result.marking = marking;
    result.events =
        fire_in_place(net, result.marking, t, token_idx, emit_token_events, seq_counter);
    return result;
}

}  // namespace

FireResult fire(const NetModel& net, const Marking& marking, const Transition& transition,
                const std::vector<std::size_t>& token_idx) {
    return fire_impl(net, marking, transition, token_idx, true, nullptr);
}

AdvanceResult advance(const NetModel& net, const Marking& marking) {
    auto bindings = collect_bindings(net, marking);
    AdvanceResult r;
    r.marking = marking;
    if (bindings.empty()) {
        r.status = AdvanceResult::Status::Deadlock;
        return r;
    }
    TimeMs earliest = bindings.front().enabling_time;
    for (const auto& b : bindings) earliest = std::min(earliest, b.enabling_time);
    if (earliest <= marking.clock) {
        r.status = AdvanceResult::Status::AlreadyEnabled;
        return r;
    }
    r.status = AdvanceResult::Status::Advanced;
    r.marking.clock = earliest;
    return r;
}

Engine::Engine(const NetModel& net, Marking initial, RunOptions options)
    : net_(net), marking_(std::move(initial)), options_(options) {
    const auto diagnostics = validate(net_);
    if (!diagnostics.empty())
        throw MalformedNetError("net '" + net_.name + "' failed validation: " +
                                diagnostics.front().element + ": " + diagnostics.front().message);

    cache_.resize(net_.transitions.size());
    dirty_.assign(net_.transitions.size(), true);
    plans_.reserve(net_.transitions.size());
    for (const auto& t : net_.transitions) plans_.push_back(make_plan(t));
    for (std::size_t i = 0; i < net_.transitions.size(); ++i)
        for (const auto& arc : net_.transitions[i].inputs) consumers_[arc.place].push_back(i);
    affected_.resize(net_.transitions.size());
    for (std::size_t i = 0; i < net_.transitions.size(); ++i) {
        std::set<std::size_t> touched;
        auto add_place = [&](const std::string& place) {
            auto it = consumers_.find(place);
            if (it == consumers_.end()) return;
            for (auto j : it->second) touched.insert(j);
        };
        for (const auto& arc : net_.transitions[i].inputs) add_place(arc.place);
        for (const auto& arc : net_.transitions[i].outputs) add_place(arc.place);
        affected_[i].assign(touched.begin(), touched.end());
    }
}

Engine::~Engine() = default;

void Engine::mark_dirty_around(std::size_t transition_idx) {
    for (auto j : affected_[transition_idx]) dirty_[j] = true;
}

std::optional<Binding> Engine::first_candidate() {
    for (std::size_t i = 0; i < net_.transitions.size(); ++i) {
        if (!dirty_[i]) continue;
        cache_[i].clear();
        enumerate_transition_planned(plans_[i], net_.transitions[i], marking_,
                                     [&](std::vector<std::size_t>& idx, TimeMs token_time) {
                                         cache_[i].push_back({idx, token_time});
                                     });
        dirty_[i] = false;
    }

    // Only candidates tied on (enabling_time, priority) need canonical keys.
    TimeMs best_time = 0;
    int best_priority = 0;
    bool have_best = false;
    for (std::size_t i = 0; i < net_.transitions.size(); ++i) {
        const int priority = net_.transitions[i].priority;
        for (const auto& c : cache_[i]) {
            const TimeMs eff = std::max(marking_.clock, c.token_time);
            if (!have_best || eff < best_time ||
                (eff == best_time && priority < best_priority)) {
                have_best = true;
                best_time = eff;
                best_priority = priority;
            }
        }
    }
    if (!have_best) return std::nullopt;

    const Transition* chosen_t = nullptr;
    const Cand* chosen_c = nullptr;
    std::string chosen_key;
    for (std::size_t i = 0; i < net_.transitions.size(); ++i) {
        const Transition& t = net_.transitions[i];
        if (t.priority != best_priority) continue;
        for (const auto& c : cache_[i]) {
            if (std::max(marking_.clock, c.token_time) != best_time) continue;
            std::string key = binding_canonical(t, marking_, c.token_idx);
            if (!chosen_t || key < chosen_key) {
                chosen_t = &t;
                chosen_c = &c;
                chosen_key = std::move(key);
            }
        }
    }

    Binding b;
    b.transition = chosen_t;
    b.token_idx = chosen_c->token_idx;
    b.enabling_time = best_time;
    b.canonical = chosen_key;
    return b;
}

bool Engine::step() {
    auto candidate = first_candidate();
    if (!candidate) return false;
    if (candidate->enabling_time > options_.horizon) {
        horizon_reached_ = true;
        return false;
    }
    if (options_.max_steps && fired_ >= options_.max_steps)
        throw DivergenceError("net '" + net_.name + "' exceeded " +
                              std::to_string(options_.max_steps) + " firings");
    ++fired_;
    marking_.clock = std::max(marking_.clock, candidate->enabling_time);
    auto events = fire_in_place(net_, marking_, *candidate->transition, candidate->token_idx,
                                options_.emit_token_events, &next_seq_);
    for (auto& ev : events) trace_.events.push_back(std::move(ev));
    mark_dirty_around(static_cast<std::size_t>(candidate->transition - net_.transitions.data()));
    return true;
}

void Engine::apply(const TokenInjection& cmd) {
    ColorToken tok = cmd.token;
    tok.timestamp = std::max(tok.timestamp, marking_.clock);

    SimEvent ev;
    ev.time = marking_.clock;
    ev.kind = EventKind::ExternalCommand;
    ev.payload["place"] = cmd.place;
    ev.payload["token"] = token_canonical(tok);
    if (!cmd.source.empty()) ev.payload["source"] = cmd.source;
    ev.seq = next_seq_++;
    trace_.events.push_back(std::move(ev));
    marking_.insert(net_, cmd.place, std::move(tok));
    auto it = consumers_.find(cmd.place);
    if (it != consumers_.end())
        for (auto j : it->second) dirty_[j] = true;
}

void Engine::log_notify(const NotifyRecord& record) {
    SimEvent ev;
    ev.time = marking_.clock;
    ev.kind = EventKind::ExternalNotify;
    ev.payload = record;
    ev.seq = next_seq_++;
    trace_.events.push_back(std::move(ev));
}

void Engine::note_deadlock() {
    SimEvent ev;
    ev.time = marking_.clock;
    ev.kind = EventKind::Deadlock;
    ev.seq = next_seq_++;
    trace_.events.push_back(std::move(ev));
}

RunResultKernel run(const NetModel& net, const Marking& initial, const RunOptions& options,
                    RunHooks* hooks) {
    Engine engine(net, initial, options);
    std::size_t delivered = 0;

    auto consult = [&]() -> bool {
        if (!hooks) return false;
        const auto& events = engine.trace().events;
        std::span<const SimEvent> fresh(events.data() + delivered, events.size() - delivered);
        HookResult hr = hooks->on_step(engine.clock(), fresh, engine.marking());
        delivered = events.size();
        for (const auto& n : hr.notifications) engine.log_notify(n);
        bool injected = false;
        for (const auto& c : hr.commands) {
            engine.apply(c);
            injected = true;
        }
        // Late-arriving notifications/commands are themselves fresh events;
        // they are delivered on the next consultation.
        return injected;
    };

    RunResultKernel out;
    try {
        while (true) {
            consult();
            if (engine.step()) continue;
            // Quiescent: give hooks one chance to unblock before declaring an
            // end.
            if (consult() && engine.step()) continue;
            break;
        }
        out.deadlocked = !engine.horizon_reached();
        if (out.deadlocked) engine.note_deadlock();
    } catch (const DivergenceError& e) {
        out.divergence = e.what();
    }
    out.final_marking = engine.marking();
    out.trace = engine.take_trace();
    return out;
}

}  // namespace shopfloor::petri
