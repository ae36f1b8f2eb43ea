#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopfloor/mes/types.hpp"

namespace shopfloor::mes {

struct DatabaseRecord {
    std::string key;
    std::map<std::string, std::string> value;
    TimeMs last_updated = 0;
    std::uint64_t write_seq = 0;
};

// In-memory map with an append-only change journal. Missing keys are a
// negative result, never an error; conflicting writes resolve last-writer-wins
// by (time, write sequence).
class Database {
public:
    explicit Database(std::string name) : name_(std::move(name)) {}

    const DatabaseRecord* query(const std::string& key) const;
    void write(const std::string& key, std::map<std::string, std::string> value, TimeMs now);

    const std::string& name() const { return name_; }
    std::size_t size() const { return records_.size(); }
    const std::vector<std::string>& journal() const { return journal_; }
    void save_journal(std::ostream& os) const;

private:
    std::string name_;
    std::map<std::string, DatabaseRecord> records_;
    std::vector<std::string> journal_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace shopfloor::mes
