#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>

#include "icftl/errors.hpp"
#include "icftl/instrument.hpp"
#include "icftl/runtime.hpp"
#include "icftl/testkit.hpp"

#include "helpers.hpp"

using namespace icftl;
using namespace icftl::testing;
using miniproc::ProgramPoint;

namespace {

ProgramPoint pt(const char* proc, int line) { return ProgramPoint{proc, line, 0}; }

std::set<ProgramPoint> kmg_points() {
    return {pt("g", 18), pt("g", 16), pt("g", 14), pt("g", 12),
            pt("m", 9),  pt("k", 6),  pt("k", 4),  pt("k", 2)};
}

std::map<std::string, std::int64_t> fold_values(const runtime::DynamicRun& run) {
    std::map<std::string, std::int64_t> out;
    for (const auto& e : run.events)
        for (const auto& [k, v] : e.values) out[k] = v;
    return out;
}

}  // namespace

TEST_CASE("executing kmg produces three labeled runs") {
    auto system = kmg_system();
    auto trace = runtime::execute(system, "k", {});
    REQUIRE(trace.labels == std::vector<std::string>{"k", "m", "g"});
    CHECK(trace.procedures == std::set<std::string>{"g", "k", "m"});

    auto shapes = run_shapes(trace);
    using V = std::map<std::string, std::int64_t>;
    RunShape expectedK{{-1, V{}},          {2, V{{"a", 8}}},  {3, V{{"y", 0}}},
                       {4, V{{"b", 9}}},   {3, V{{"y", 1}}},  {4, V{{"b", 9}}},
                       {6, V{{"a", 17}}},  {7, V{}}};
    RunShape expectedM{{-1, V{{"a", 17}}}, {9, V{{"c", 9}}}, {10, V{}}};
    // Line 16 computes k = b + l = 9 + 20 and line 18 adds 4 to it.
    RunShape expectedG{{-1, V{{"b", 9}, {"y", 17}}},
                       {12, V{{"l", 20}}},
                       {16, V{{"k", 29}}},
                       {18, V{{"y", 33}}}};
    CHECK(shapes[0] == expectedK);
    CHECK(shapes[1] == expectedM);
    CHECK(shapes[2] == expectedG);
}

TEST_CASE("marker recording matches the executed path") {
    auto system = kmg_system();
    auto trace = runtime::execute(system, "k", {}, {.recordMarkers = true});
    auto shapes = run_shapes(trace);

    std::vector<int> kLines, gLines;
    for (const auto& [line, values] : shapes[0]) kLines.push_back(line);
    for (const auto& [line, values] : shapes[2]) gLines.push_back(line);
    CHECK(kLines == std::vector<int>{-1, 2, 3, 4, 3, 4, 5, 6, 7});
    // The else branch is taken: the if-header, else and endIf markers appear,
    // the untaken line 14 does not.
    CHECK(gLines == std::vector<int>{-1, 12, 13, 15, 16, 17, 18});
}

TEST_CASE("timestamps increase strictly across the interleaving") {
    auto system = kmg_system();
    for (bool markers : {false, true}) {
        auto trace = runtime::execute(system, "k", {}, {.recordMarkers = markers});
        std::vector<runtime::Timestamp> stamps;
        for (const auto& run : trace.runs)
            for (const auto& e : run.events) stamps.push_back(e.t);
        std::sort(stamps.begin(), stamps.end());
        for (std::size_t i = 1; i < stamps.size(); ++i) REQUIRE(stamps[i - 1] < stamps[i]);
    }
}

TEST_CASE("call events are recorded after the callee completes") {
    auto system = kmg_system();
    auto trace = runtime::execute(system, "k", {});
    auto lastOf = [&](std::size_t run) { return trace.runs[run].events.back(); };
    // k's call of m is the last event overall; m's call of g follows all of g.
    CHECK(lastOf(0).line == 7);
    CHECK(lastOf(1).line == 10);
    CHECK(lastOf(2).t < lastOf(1).t);
    CHECK(lastOf(1).t < lastOf(0).t);
}

TEST_CASE("an empty procedure yields a single entry event") {
    auto system = miniproc::parse_program("def e():\n");
    auto trace = runtime::execute(system, "e", {});
    REQUIRE(trace.runs.size() == 1);
    REQUIRE(trace.runs[0].events.size() == 1);
    CHECK(!trace.runs[0].events[0].line.has_value());
}

TEST_CASE("runtime errors") {
    auto undef = miniproc::parse_program("def p():\n    x = y + 1\n");
    CHECK_THROWS_AS(runtime::execute(undef, "p", {}), RuntimeError);
    try {
        runtime::execute(undef, "p", {});
    } catch (const RuntimeError& e) {
        CHECK(e.proc() == "p");
        CHECK(e.line() == 2);
    }

    auto deep = miniproc::parse_program("def p():\n    p()\n");
    CHECK_THROWS_AS(runtime::execute(deep, "p", {}, {.maxCallDepth = 50}), DepthExceeded);

    auto wide = miniproc::parse_program(
        "def p():\n    a = 4611686018427387904\n    b = a * a\n");
    CHECK_THROWS_AS(runtime::execute(wide, "p", {}), RuntimeError);

    auto arity = kmg_system();
    CHECK_THROWS_AS(runtime::execute(arity, "g", {1}), LinkError);
    CHECK_THROWS_AS(runtime::execute(arity, "nosuch", {}), LinkError);
}

TEST_CASE("filtering the reference trace keeps exactly the planned events") {
    auto trace = reference_trace();
    auto slice = runtime::filter_trace(trace, kmg_points());

    REQUIRE(slice.trace.runs.size() == 3);
    CHECK(slice.trace.labels == std::vector<std::string>{"k", "m", "g"});
    CHECK(slice.origin == std::vector<std::size_t>{0, 1, 2});

    auto shapes = run_shapes(slice.trace);
    using V = std::map<std::string, std::int64_t>;
    CHECK(shapes[0] == RunShape{{2, V{{"a", 8}}},
                                {4, V{{"b", 9}}},
                                {4, V{{"b", 9}}},
                                {6, V{{"a", 17}}}});
    CHECK(shapes[1] == RunShape{{9, V{{"c", 9}}}});
    CHECK(shapes[2] == RunShape{{12, V{{"l", 20}}}, {16, V{{"k", 29}}}, {18, V{{"y", 23}}}});

    // No event for line 14: that branch was not taken.
    for (const auto& run : slice.trace.runs)
        for (const auto& e : run.events) CHECK(*e.line != 14);
}

TEST_CASE("filter edge cases") {
    auto trace = reference_trace();

    auto empty = runtime::filter_trace(trace, {});
    CHECK(empty.trace.runs.empty());
    CHECK(empty.trace.procedures.empty());
    CHECK(empty.origin.empty());

    // A predicate that accepts every statement point keeps everything except
    // the entry events.
    std::set<ProgramPoint> all;
    for (std::size_t r = 0; r < trace.runs.size(); ++r)
        for (const auto& e : trace.runs[r].events)
            if (e.line) all.insert(pt(trace.labels[r].c_str(), *e.line));
    auto full = runtime::filter_trace(trace, all);
    REQUIRE(full.trace.runs.size() == 3);
    for (std::size_t r = 0; r < full.trace.runs.size(); ++r)
        CHECK(full.trace.runs[r].events.size() == trace.runs[r].events.size() - 1);
}

TEST_CASE("filtered slices preserve order and drop empty runs") {
    auto system = kmg_system();
    auto trace = runtime::execute(system, "k", {});
    auto slice = runtime::filter_trace(trace, {pt("g", 18), pt("g", 12)});
    REQUIRE(slice.trace.runs.size() == 1);
    CHECK(slice.trace.labels == std::vector<std::string>{"g"});
    CHECK(slice.origin == std::vector<std::size_t>{2});
    REQUIRE(slice.trace.runs[0].events.size() == 2);
    CHECK(slice.trace.runs[0].events[0].t < slice.trace.runs[0].events[1].t);
}

TEST_CASE("trace serialization round trips") {
    auto system = kmg_system();
    for (bool markers : {false, true}) {
        auto trace = runtime::execute(system, "k", {}, {.recordMarkers = markers});
        std::string text = runtime::write_trace(trace);
        auto loaded = runtime::read_trace(text);
        CHECK(loaded == trace);
        CHECK(runtime::write_trace(loaded) == text);
    }
    auto ref = reference_trace();
    CHECK(runtime::read_trace(runtime::write_trace(ref)) == ref);
}

TEST_CASE("write-read-write is a fixpoint on 500 generated traces") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        testkit::GenConfig config;
        config.seed = seed;
        config.maxProcs = 3;
        config.maxStmtsPerProc = 8;
        auto system = testkit::gen_program(config);
        auto trace = runtime::execute(system, "p0", {}, {.recordMarkers = seed % 2 == 0});
        std::string once = runtime::write_trace(trace);
        std::string twice = runtime::write_trace(runtime::read_trace(once));
        REQUIRE(once == twice);
    }
}

TEST_CASE("malformed traces are rejected with line numbers") {
    auto system = kmg_system();
    std::string good = runtime::write_trace(runtime::execute(system, "k", {}));

    auto corrupt_line = [&](std::size_t lineNo, const std::string& replacement) {
        std::istringstream in(good);
        std::string out, line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            out += (n == lineNo ? replacement : line) + "\n";
        }
        return out;
    };

    try {
        runtime::read_trace(corrupt_line(3, "{not json"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
    }

    // Duplicate timestamps are rejected at load.
    std::istringstream in(good);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    std::string dup = lines[0] + "\n" + lines[1] + "\n" + lines[1] + "\n";
    CHECK_THROWS_AS(runtime::read_trace(dup), FormatError);

    CHECK_THROWS_AS(runtime::read_trace(""), FormatError);
    CHECK_THROWS_AS(
        runtime::read_trace(
            "{\"procedures\":[\"p\"],\"labels\":{\"0\":\"p\"}}\n"
            "{\"run\":3,\"proc\":\"p\",\"t\":\"0.1\",\"line\":2,\"values\":{}}\n"),
        FormatError);
}

TEST_CASE("timestamp parsing and formatting") {
    CHECK(runtime::Timestamp::parse("0").str() == "0.0");
    CHECK(runtime::Timestamp::parse("2.7").micros == 2'700'000);
    CHECK(runtime::Timestamp::parse("2.700").str() == "2.7");
    CHECK(runtime::Timestamp::parse("3.141592").str() == "3.141592");
    CHECK_THROWS_AS(runtime::Timestamp::parse("-1"), std::invalid_argument);
    CHECK_THROWS_AS(runtime::Timestamp::parse("1."), std::invalid_argument);
    CHECK_THROWS_AS(runtime::Timestamp::parse("1.0000001"), std::invalid_argument);
    CHECK_THROWS_AS(runtime::Timestamp::parse("abc"), std::invalid_argument);
}

TEST_CASE("consecutive run events are forward-connected in the SCFG") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        testkit::GenConfig config;
        config.seed = seed;
        auto system = testkit::gen_program(config);
        auto scfgs = scfg::ScfgIndex::build(system);
        auto trace = runtime::execute(system, "p0", {}, {.recordMarkers = true});

        for (std::size_t r = 0; r < trace.runs.size(); ++r) {
            const auto& graph = scfgs.at(trace.labels[r]);
            // Reflexive-transitive closure over successor edges.
            std::vector<std::set<int>> reach(graph.vertices.size());
            for (const auto& v : graph.vertices) {
                std::deque<int> queue{v.id};
                reach[static_cast<std::size_t>(v.id)].insert(v.id);
                while (!queue.empty()) {
                    int cur = queue.front();
                    queue.pop_front();
                    for (int next : graph.successors[static_cast<std::size_t>(cur)])
                        if (reach[static_cast<std::size_t>(v.id)].insert(next).second)
                            queue.push_back(next);
                }
            }
            const auto& events = trace.runs[r].events;
            for (std::size_t i = 1; i < events.size(); ++i) {
                int from = events[i - 1].line ? graph.state_at_line(*events[i - 1].line)->id
                                              : graph.entryId;
                int to = events[i].line ? graph.state_at_line(*events[i].line)->id
                                        : graph.entryId;
                REQUIRE(reach[static_cast<std::size_t>(from)].count(to) == 1);
            }
        }
    }
}

TEST_CASE("per-variable final values match a direct evaluator") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        testkit::GenConfig config;
        config.seed = seed;
        config.allowLoops = seed % 2 == 0;  // half the corpus is loop-free
        auto system = testkit::gen_program(config);
        auto trace = runtime::execute(system, "p0", {});
        auto expected = testkit::reference_eval(system, "p0", {});
        REQUIRE(fold_values(trace.runs[0]) == expected);
    }
}
