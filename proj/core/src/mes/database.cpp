#include "shopfloor/mes/database.hpp"

#include <ostream>

namespace shopfloor::mes {

const DatabaseRecord* Database::query(const std::string& key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

void Database::write(const std::string& key, std::map<std::string, std::string> value, TimeMs now) {
    const std::uint64_t seq = next_seq_++;
    auto it = records_.find(key);
    if (it != records_.end()) {
        // Last-writer-wins by (time, seq); seq alone decides within an instant.
        if (std::pair(now, seq) < std::pair(it->second.last_updated, it->second.write_seq)) return;
    }
    std::string line = std::to_string(now) + "|" + std::to_string(seq) + "|" + key + "|";
    bool first = true;
    for (const auto& [k, v] : value) {
        if (!first) line += ";";
        first = false;
        line += k + "=" + v;
    }
    journal_.push_back(std::move(line));
    records_[key] = DatabaseRecord{key, std::move(value), now, seq};
}

void Database::save_journal(std::ostream& os) const {
    for (const auto& line : journal_) os << line << '\n';
}

}  // namespace shopfloor::mes
