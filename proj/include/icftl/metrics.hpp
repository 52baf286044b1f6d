#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"

namespace icftl::metrics {

// Caller-chain distance; infinite for points unreachable from the
// violation procedure through the call graph.
struct Proximity {
    bool infinite = false;
    int value = 0;

    static Proximity inf() { return Proximity{true, 0}; }
    static Proximity at(int v) { return Proximity{false, v}; }

    bool operator<=(const Proximity& other) const {
        if (other.infinite) return true;
        if (infinite) return false;
        return value <= other.value;
    }
    bool operator==(const Proximity&) const = default;

    std::string str() const { return infinite ? "inf" : std::to_string(value); }
};

struct GroundTruthEntry {
    miniproc::ProgramPoint point;
    Proximity proximity;
};

struct LevelStats {
    std::int64_t tp = 0, fp = 0, fn = 0;
    double precision = 1.0, recall = 1.0;
};

struct MetricsReport {
    std::vector<std::pair<Proximity, LevelStats>> perProximity;
    double crSloc = 1.0, crFunc = 1.0;
};

// Shortest caller-chain distance from `violationProc` up the call graph to
// the point's procedure: 0 inside the violation procedure, 1 in a direct
// caller, and so on; the minimum over several violation procedures wins.
Proximity proximity_of(const miniproc::ProgramPoint& point, const std::string& violationProc,
                       const miniproc::SystemOfProcedures& system);
Proximity proximity_of(const miniproc::ProgramPoint& point,
                       const std::vector<std::string>& violationProcs,
                       const miniproc::SystemOfProcedures& system);

// Compares predicted points against the ground truth, both restricted to
// entries with proximity <= level. Ratios are 1.0 when their denominator
// is zero.
LevelStats precision_recall(const std::set<miniproc::ProgramPoint>& predicted,
                            const std::vector<GroundTruthEntry>& groundTruth, Proximity level,
                            const std::vector<std::string>& violationProcs,
                            const miniproc::SystemOfProcedures& system);

// Complexity-reduction ratios from raw counts: 1 - points/sloc and
// 1 - touchedFunctions/functions. Throws InvariantViolation on zero
// denominators.
std::pair<double, double> complexity_reduction_counts(std::int64_t points, std::int64_t sloc,
                                                      std::int64_t touchedFunctions,
                                                      std::int64_t functions);

// SLOC counts the system's statement lines (headers, else lines and end
// markers included); the function count is the number of procedures.
std::pair<double, double> complexity_reduction(const std::set<miniproc::ProgramPoint>& points,
                                               const miniproc::SystemOfProcedures& system);

// GT file: JSON list of {proc, line, proximity: int|"inf"}.
std::vector<GroundTruthEntry> read_gt_json(const std::string& text);
std::string write_gt_json(const std::vector<GroundTruthEntry>& entries);

}  // namespace icftl::metrics
