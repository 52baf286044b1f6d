#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"

namespace icftl::runtime {

// Synthetic clock value in integer microseconds; the interpreter advances
// it by 0.1 per recorded event.
struct Timestamp {
    std::int64_t micros = 0;

    static Timestamp parse(const std::string& text);  // throws std::invalid_argument
    std::string str() const;

    auto operator<=>(const Timestamp&) const = default;
};

// One recorded concrete state. `line` is empty for procedure-entry events;
// `values` maps the variables written at this point to their new values.
struct TraceEvent {
    Timestamp t;
    std::optional<int> line;
    std::map<std::string, std::int64_t> values;

    bool operator==(const TraceEvent&) const = default;
};

struct DynamicRun {
    std::vector<TraceEvent> events;

    bool operator==(const DynamicRun&) const = default;
};

// Inter-procedural execution record: one run per procedure activation,
// labeled with the procedure's name. Timestamps increase strictly across
// the interleaving of all runs.
struct IotaTrace {
    std::set<std::string> procedures;
    std::vector<DynamicRun> runs;
    std::vector<std::string> labels;  // parallel to runs

    std::size_t event_count() const;

    bool operator==(const IotaTrace&) const = default;
};

// Filtered trace; `origin[i]` is the index of the run of the unfiltered
// trace that run i was obtained from (injective by construction).
struct FSlice {
    IotaTrace trace;
    std::vector<std::size_t> origin;
};

struct ExecOptions {
    // Record if-header, else and endFor/endIf marker events (they carry
    // empty value maps and are never instrumentation points).
    bool recordMarkers = false;
    int maxCallDepth = 10000;
};

// Deterministic big-step interpretation. Each procedure activation opens a
// run beginning with its entry event; a call statement's own event is
// appended to the caller's run after the callee completes. Throws
// RuntimeError on undefined-variable reads and arithmetic overflow,
// DepthExceeded beyond the call-depth bound.
IotaTrace execute(const miniproc::SystemOfProcedures& system, const std::string& entry,
                  const std::vector<std::int64_t>& args, const ExecOptions& opts = {});

// Keeps exactly the events whose (procedure, line) is in `points`; empty
// runs are dropped and the procedure set and labels are rebuilt.
FSlice filter_trace(const IotaTrace& trace, const std::set<miniproc::ProgramPoint>& points);

// JSON Lines: a header object, then one object per event in global
// timestamp order. Lossless and byte-stable under rewrite.
std::string write_trace(const IotaTrace& trace);

// Throws FormatError (with the offending line number) on malformed input,
// unknown run indices, or non-increasing timestamps.
IotaTrace read_trace(const std::string& text);

}  // namespace icftl::runtime
