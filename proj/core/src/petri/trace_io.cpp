#include "shopfloor/petri/trace_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "shopfloor/errors.hpp"

namespace shopfloor::petri {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case ';': out += "\\s"; break;
            case '=': out += "\\e"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape(const std::string& s, std::size_t line_no) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out += s[i];
            continue;
        }
        if (i + 1 >= s.size()) throw Error("trace line " + std::to_string(line_no) + ": dangling escape");
        switch (s[++i]) {
            case '\\': out += '\\'; break;
            case 's': out += ';'; break;
            case 'e': out += '='; break;
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            default: throw Error("trace line " + std::to_string(line_no) + ": bad escape");
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string trace_line(const SimEvent& event) {
    std::string out = std::to_string(event.time);
    out += '\t';
    out += event_kind_str(event.kind);
    out += '\t';
    out += escape(event.transition);
    out += '\t';
    bool first = true;
    for (const auto& [k, v] : event.payload) {
        if (!first) out += ';';
        first = false;
        out += escape(k);
        out += '=';
        out += escape(v);
    }
    return out;
}

void write_trace(std::ostream& os, const EventTrace& trace) {
    for (const auto& ev : trace.events) os << trace_line(ev) << '\n';
}

std::string trace_to_string(const EventTrace& trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

EventTrace read_trace(std::istream& is) {
    EventTrace trace;
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t seq = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cols = split(line, '\t');
        if (cols.size() < 3)
            throw Error("trace line " + std::to_string(line_no) + ": expected at least 3 columns");
        SimEvent ev;
        try {
            ev.time = std::stoll(cols[0]);
        } catch (const std::exception&) {
            throw Error("trace line " + std::to_string(line_no) + ": bad time '" + cols[0] + "'");
        }
        auto kind = event_kind_from(cols[1]);
        if (!kind)
            throw Error("trace line " + std::to_string(line_no) + ": unknown kind '" + cols[1] + "'");
        ev.kind = *kind;
        ev.transition = unescape(cols[2], line_no);
        if (cols.size() >= 4 && !cols[3].empty()) {
            for (const auto& pair : split(cols[3], ';')) {
                auto eq = pair.find('=');
                if (eq == std::string::npos)
                    throw Error("trace line " + std::to_string(line_no) + ": bad payload entry");
                ev.payload[unescape(pair.substr(0, eq), line_no)] =
                    unescape(pair.substr(eq + 1), line_no);
            }
        }
        ev.seq = seq++;
        trace.events.push_back(std::move(ev));
    }
    return trace;
}

EventTrace trace_from_string(const std::string& text) {
    std::istringstream is(text);
    return read_trace(is);
}

}  // namespace shopfloor::petri
