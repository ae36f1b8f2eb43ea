#include "shopfloor/mes/ontology.hpp"

#include <algorithm>
#include <set>

namespace shopfloor::mes {

std::vector<CapabilityRecord> default_capability_records(const fms::FmsConfig& config) {
    using namespace fms;
    return {
        {kResCnc, "milling", kStationMachining, config.cnc_time},
        {kResRobot, "machine-tending", kStationMachining, config.cnc_time},
        {kResGlueAssembly, "assembly", kStationAssembly, config.assembly_time},
        {kResLaserQc, "quality-check", kStationAssembly, config.assembly_time},
        {kResAsrsCrane, "storage", kStationAsrs, config.transport_time},
        {kResConveyor, "transport", kStationAsrs, config.transport_time},
    };
}

std::vector<std::string> match_capability(
    const std::vector<std::string>& required_capabilities,
    const std::vector<CapabilityRecord>& records,
    const std::map<std::string, TimeMs>& earliest_start_by_station) {
    std::map<std::string, std::set<std::string>> covered;  // station -> capabilities
    for (const auto& r : records) covered[r.station].insert(r.capability);

    std::vector<std::string> candidates;
    for (const auto& [station, caps] : covered) {
        bool all = true;
        for (const auto& need : required_capabilities)
            if (!caps.count(need)) all = false;
        if (all) candidates.push_back(station);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const std::string& a, const std::string& b) {
                  auto ea = earliest_start_by_station.count(a) ? earliest_start_by_station.at(a) : 0;
                  auto eb = earliest_start_by_station.count(b) ? earliest_start_by_station.at(b) : 0;
                  if (ea != eb) return ea < eb;
                  return a < b;
              });
    return candidates;
}

}  // namespace shopfloor::mes
