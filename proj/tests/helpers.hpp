#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"
#include "icftl/runtime.hpp"
#include "icftl/scfg.hpp"

namespace icftl::testing {

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(ICFTL_FIXTURE_DIR) + "/" + name, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline miniproc::SystemOfProcedures kmg_system() {
    return miniproc::parse_program(read_fixture("kmg.mp"));
}

// The recorded execution of kmg.mp written out by hand, including the
// marker events, with irregular timestamps. Used as input data for the
// monitor and filter tests.
inline runtime::IotaTrace reference_trace() {
    using runtime::Timestamp;
    using runtime::TraceEvent;
    runtime::IotaTrace trace;
    trace.procedures = {"k", "m", "g"};
    trace.labels = {"k", "m", "g"};
    trace.runs.resize(3);
    auto at = [](const char* t) { return Timestamp::parse(t); };
    auto ev = [&](int run, const char* t, std::optional<int> line,
                  std::map<std::string, std::int64_t> values) {
        trace.runs[static_cast<std::size_t>(run)].events.push_back(
            TraceEvent{at(t), line, std::move(values)});
    };
    ev(0, "0", std::nullopt, {});
    ev(0, "0.2", 2, {{"a", 8}});
    ev(0, "0.4", 3, {{"y", 0}});
    ev(0, "0.6", 4, {{"b", 9}});
    ev(0, "0.8", 3, {{"y", 1}});
    ev(0, "1.0", 4, {{"b", 9}});
    ev(0, "1.1", 5, {});
    ev(0, "1.2", 6, {{"a", 17}});
    ev(1, "1.4", std::nullopt, {});
    ev(1, "1.6", 9, {{"c", 9}});
    ev(2, "1.7", std::nullopt, {});
    ev(2, "1.9", 12, {{"l", 20}});
    ev(2, "2.0", 13, {});
    ev(2, "2.2", 15, {});
    ev(2, "2.4", 16, {{"k", 29}});
    ev(2, "2.5", 17, {});
    ev(2, "2.7", 18, {{"y", 23}});
    ev(1, "2.9", 10, {});
    ev(0, "3.1", 7, {});
    return trace;
}

// (line, values) pairs per run, for order-sensitive comparisons that ignore
// timestamps.
using RunShape = std::vector<std::pair<int, std::map<std::string, std::int64_t>>>;

inline std::vector<RunShape> run_shapes(const runtime::IotaTrace& trace) {
    std::vector<RunShape> out;
    for (const runtime::DynamicRun& run : trace.runs) {
        RunShape shape;
        for (const runtime::TraceEvent& e : run.events)
            shape.emplace_back(e.line ? *e.line : -1, e.values);
        out.push_back(std::move(shape));
    }
    return out;
}

}  // namespace icftl::testing
