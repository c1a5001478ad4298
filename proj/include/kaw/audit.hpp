#pragma once

#include "kaw/runtime.hpp"
#include "kaw/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kaw {

struct AuditItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditItem> items;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const AuditItem& item(const std::string& name) const;
};

/*
 * Re-derives every property of a logged run from the trace and the scenario
 * alone (no controller): timing and quantization, avoidance of the objective's
 * forbidden cells, sensor replay, street avoidance after detection, the
 * objective and each post-detection composite formula on the finite trace,
 * and the reroute geometry around every detection.
 */
AuditReport audit_trace(const World& world, const Trace& trace);

void print_report(std::ostream& out, const AuditReport& report);

} // namespace kaw
