#include "shopfloor/mes/conformance.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace shopfloor::mes {

namespace {

struct Msg {
    const AgentMessage* m;
    std::string desc() const {
        return performative_str(m->performative) + " " + m->sender.str() + " -> " +
               m->receiver.str();
    }
};

bool is(const AgentMessage& m, Performative p, Role from, Role to) {
    return m.performative == p && m.sender.role == from && m.receiver.role == to;
}

std::string payload_kind(const AgentMessage& m) {
    auto it = m.payload.find("kind");
    return it == m.payload.end() ? std::string() : it->second;
}

// Allocation conversation: linear except for the parked-retry loop and the
// optional trailing completion notify.
void check_allocation_conv(const std::string& conv, const std::vector<const AgentMessage*>& msgs,
                           std::vector<std::string>& out) {
    enum class S {
        Start,
        Announced,
        AskedData,
        DataOk,
        AskedAvail,
        Parked,
        Accepted,
        Informed,
        Dispatched,
        Deferred,
        Completed,
    };
    S s = S::Start;
    auto fail = [&](const AgentMessage& m, const char* expect) {
        out.push_back("conversation " + conv + ": unexpected " + Msg{&m}.desc() + " (expected " +
                      expect + ")");
    };

    for (const auto* pm : msgs) {
        const auto& m = *pm;
        switch (s) {
            case S::Start:
                if (is(m, Performative::Request, Role::SMA, Role::AM)) s = S::Announced;
                else { fail(m, "request SMA->AM"); return; }
                break;
            case S::Announced:
                if (is(m, Performative::Query, Role::AM, Role::DbaShop)) s = S::AskedData;
                else { fail(m, "query AM->DBA-shop"); return; }
                break;
            case S::AskedData:
                if (is(m, Performative::Inform, Role::DbaShop, Role::AM)) s = S::DataOk;
                else if (is(m, Performative::Refuse, Role::DbaShop, Role::AM)) s = S::Deferred;
                else { fail(m, "inform/refuse DBA-shop->AM"); return; }
                break;
            case S::DataOk:
                if (is(m, Performative::Query, Role::AM, Role::SCA)) s = S::AskedAvail;
                else { fail(m, "query AM->SCA"); return; }
                break;
            case S::AskedAvail:
                if (is(m, Performative::Propose, Role::SCA, Role::AM)) s = S::Accepted;
                else if (is(m, Performative::Refuse, Role::SCA, Role::AM)) s = S::Parked;
                else { fail(m, "propose/refuse SCA->AM"); return; }
                break;
            case S::Parked:
                if (is(m, Performative::Query, Role::AM, Role::SCA)) s = S::AskedAvail;
                else { fail(m, "retry query AM->SCA"); return; }
                break;
            case S::Accepted:
                if (is(m, Performative::Accept, Role::AM, Role::DbaShop)) s = S::Informed;
                else { fail(m, "accept AM->DBA-shop"); return; }
                break;
            case S::Informed:
                if (is(m, Performative::Inform, Role::DbaShop, Role::SCA)) s = S::Dispatched;
                else { fail(m, "inform DBA-shop->SCA"); return; }
                break;
            case S::Dispatched:
                if (is(m, Performative::Command, Role::SCA, Role::MRA)) s = S::Completed;
                else { fail(m, "command SCA->MRA"); return; }
                break;
            case S::Completed:
                if (is(m, Performative::Notify, Role::AM, Role::SMA)) break;  // op complete
                fail(m, "nothing after dispatch but the completion notify");
                return;
            case S::Deferred:
                fail(m, "nothing after a data refusal");
                return;
        }
    }
    if (s != S::Completed && s != S::Deferred && s != S::Dispatched && s != S::Parked) {
        out.push_back("conversation " + conv + ": ended mid-negotiation");
    }
}

// Execution conversation: started + bridge forward, then (failure, repair)*
// completion; monitoring fan-out within a block may interleave.
void check_execution_conv(const std::string& conv, const std::vector<const AgentMessage*>& msgs,
                          std::vector<std::string>& out) {
    auto fail = [&](const AgentMessage& m, const char* expect) {
        out.push_back("conversation " + conv + ": unexpected " + Msg{&m}.desc() + " (expected " +
                      expect + ")");
    };

    std::size_t i = 0;
    if (i >= msgs.size() || !is(*msgs[i], Performative::Notify, Role::MRA, Role::SCA) ||
        payload_kind(*msgs[i]) != "started") {
        if (i < msgs.size()) fail(*msgs[i], "started notify MRA->SCA");
        else out.push_back("conversation " + conv + ": empty execution conversation");
        return;
    }
    ++i;
    if (i >= msgs.size() || !is(*msgs[i], Performative::Command, Role::MRA, Role::AMI)) {
        if (i < msgs.size()) fail(*msgs[i], "command MRA->AMI");
        else out.push_back("conversation " + conv + ": missing bridge forward");
        return;
    }
    ++i;

    bool completed = false;
    while (i < msgs.size()) {
        const auto& head = *msgs[i];
        if (!is(head, Performative::Notify, Role::AMI, Role::SMonA)) {
            fail(head, "block head notify AMI->SMonA");
            return;
        }
        const std::string kind = payload_kind(head);
        if (kind != "failure" && kind != "repair" && kind != "completed") {
            fail(head, "failure/repair/completed block");
            return;
        }
        if (completed) {
            fail(head, "nothing after the completion block");
            return;
        }
        ++i;
        bool smca_pending = true;
        bool forward_pending = true;
        bool report_pending = (kind != "failure");  // SCA reports repair/release to AM
        while (smca_pending || forward_pending || report_pending) {
            if (i >= msgs.size()) {
                out.push_back("conversation " + conv + ": truncated " + kind + " block");
                return;
            }
            const auto& m = *msgs[i];
            if (smca_pending && is(m, Performative::Notify, Role::AMI, Role::SMCA) &&
                payload_kind(m) == kind) {
                smca_pending = false;
            } else if (forward_pending && is(m, Performative::Notify, Role::SMonA, Role::SCA) &&
                       payload_kind(m) == kind) {
                forward_pending = false;
            } else if (report_pending && !forward_pending &&
                       is(m, Performative::Notify, Role::SCA, Role::AM) &&
                       payload_kind(m) == (kind == "completed" ? "released" : "repair")) {
                report_pending = false;
            } else {
                fail(m, ("member of " + kind + " block").c_str());
                return;
            }
            ++i;
        }
        if (kind == "completed") completed = true;
        if (kind == "failure") {
            // The next block must be a repair.
            if (i < msgs.size() && payload_kind(*msgs[i]) != "repair") {
                fail(*msgs[i], "repair block after a failure");
                return;
            }
        }
    }
    if (!completed)
        out.push_back("conversation " + conv + ": execution never completed");
}

}  // namespace

ConformanceReport check_conformance(const std::vector<AgentMessage>& log) {
    ConformanceReport report;
    report.messages = log.size();

    // Sequence invariants.
    std::map<std::string, std::uint64_t> last_seq;
    std::set<std::uint64_t> seen_seqs;
    for (const auto& m : log) {
        auto key = m.sender.str();
        auto it = last_seq.find(key);
        if (it != last_seq.end() && m.seq <= it->second)
            report.violations.push_back("sender " + key + " seq not strictly increasing at " +
                                        std::to_string(m.seq));
        last_seq[key] = m.seq;
        if (m.in_reply_to && !seen_seqs.count(*m.in_reply_to))
            report.violations.push_back("message from " + key + " replies to unseen seq " +
                                        std::to_string(*m.in_reply_to));
        seen_seqs.insert(m.seq);
    }

    // Group by conversation, preserving delivery order.
    std::map<std::string, std::vector<const AgentMessage*>> convs;
    std::vector<std::string> conv_order;
    for (const auto& m : log) {
        auto [it, inserted] = convs.try_emplace(m.conversation_id);
        if (inserted) conv_order.push_back(m.conversation_id);
        it->second.push_back(&m);
    }
    report.conversations = convs.size();

    for (const auto& conv : conv_order) {
        const auto& msgs = convs[conv];
        if (conv.rfind("task-", 0) == 0) {
            check_allocation_conv(conv, msgs, report.violations);
        } else if (conv.rfind("exec-", 0) == 0) {
            check_execution_conv(conv, msgs, report.violations);
        } else {
            report.violations.push_back("conversation " + conv + ": unknown family");
        }
    }
    return report;
}

std::vector<std::string> audit_calendars(
    const std::map<std::string, std::vector<CalendarEntry>>& calendars) {
    std::vector<std::string> out;
    for (const auto& [resource, entries] : calendars) {
        auto sorted = entries;
        std::sort(sorted.begin(), sorted.end(),
                  [](const CalendarEntry& a, const CalendarEntry& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].start < sorted[i - 1].end) {
                std::ostringstream os;
                os << resource << ": '" << sorted[i - 1].task_id << "' [" << sorted[i - 1].start
                   << "," << sorted[i - 1].end << ") overlaps '" << sorted[i].task_id << "' ["
                   << sorted[i].start << "," << sorted[i].end << ")";
                out.push_back(os.str());
            }
        }
    }
    return out;
}

}  // namespace shopfloor::mes
