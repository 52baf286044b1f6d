#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "icftl/instrument.hpp"
#include "icftl/runtime.hpp"

#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exitCode = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "icftl_cli_test";
    fs::create_directories(dir);
    return dir;
}

CommandResult run_cli(const std::string& args) {
    fs::path dir = work_dir();
    fs::path outPath = dir / "stdout.txt";
    fs::path errPath = dir / "stderr.txt";
    std::string cmd = std::string(ICFTL_CLI_PATH) + " " + args + " > " + outPath.string() +
                      " 2> " + errPath.string();
    int status = std::system(cmd.c_str());
    CommandResult result;
    result.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(outPath);
    result.err = slurp(errPath);
    return result;
}

std::string fixture(const char* name) {
    return std::string(ICFTL_FIXTURE_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("version and help succeed") {
    CHECK(run_cli("--version").exitCode == 0);
    CHECK(run_cli("--help").exitCode == 0);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("").exitCode == 2);
    CHECK(run_cli("scfg").exitCode == 2);          // missing --program
    CHECK(run_cli("frobnicate").exitCode == 2);
}

TEST_CASE("analysis errors exit with 3 and a structured message") {
    auto result = run_cli("scfg --program /nonexistent.mp --dot");
    CHECK(result.exitCode == 3);
    auto msg = nlohmann::json::parse(result.err);
    CHECK(msg.contains("phase"));
    CHECK(msg.contains("detail"));

    fs::path bad = work_dir() / "bad.mp";
    std::ofstream(bad) << "def p():\n    q(1)\n";
    auto link = run_cli("scfg --program " + bad.string() + " --dot");
    CHECK(link.exitCode == 3);
    CHECK(nlohmann::json::parse(link.err).at("phase") == "link");
}

TEST_CASE("scfg output is stable across invocations") {
    std::string args = "scfg --program " + fixture("kmg.mp") + " --proc k --dot";
    auto first = run_cli(args);
    auto second = run_cli(args);
    CHECK(first.exitCode == 0);
    CHECK(first.out == second.out);
    CHECK(first.out.find("W={a} R={a,b} C={}") != std::string::npos);
}

TEST_CASE("instrument, run, check and diagnose compose") {
    fs::path dir = work_dir();
    fs::path plan = dir / "plan.json";
    fs::path traceFull = dir / "full.jsonl";
    fs::path traceFiltered = dir / "filtered.jsonl";
    fs::path diagnosis = dir / "diagnosis.json";

    CHECK(run_cli("instrument --program " + fixture("kmg.mp") + " --spec " +
                  fixture("y_bound.icftl") + " --out " + plan.string())
              .exitCode == 0);
    auto loaded = icftl::instrument::read_plan_json(slurp(plan));
    CHECK(loaded.unionPoints.size() == 8);

    CHECK(run_cli("run --program " + fixture("kmg.mp") + " --entry k --out " +
                  traceFull.string())
              .exitCode == 0);
    CHECK(run_cli("run --program " + fixture("kmg.mp") + " --entry k --points " + plan.string() +
                  " --out " + traceFiltered.string())
              .exitCode == 0);
    auto full = icftl::runtime::read_trace(slurp(traceFull));
    auto filtered = icftl::runtime::read_trace(slurp(traceFiltered));
    CHECK(filtered.event_count() == 8);
    CHECK(full.event_count() > filtered.event_count());

    // The violated specification drives both check and diagnose to exit 1.
    auto check = run_cli("check --trace " + traceFiltered.string() + " --spec " +
                         fixture("y_bound.icftl") + " --program " + fixture("kmg.mp"));
    CHECK(check.exitCode == 1);
    CHECK(check.out.find("binding#0 q=g:18@") != std::string::npos);
    CHECK(check.out.find("-> false") != std::string::npos);

    auto diag = run_cli("diagnose --program " + fixture("kmg.mp") + " --spec " +
                        fixture("y_bound.icftl") + " --trace " + traceFiltered.string() +
                        " --plan " + plan.string() + " --out " + diagnosis.string());
    CHECK(diag.exitCode == 1);
    auto doc = nlohmann::json::parse(slurp(diagnosis));
    REQUIRE(doc.size() == 1);
    CHECK(doc[0].at("expression") == "q(y)");
    CHECK(doc[0].at("slice").size() == 8);

    // Checking the full and the filtered trace agrees binding by binding.
    auto checkFull = run_cli("check --trace " + traceFull.string() + " --spec " +
                             fixture("y_bound.icftl") + " --program " + fixture("kmg.mp"));
    CHECK(checkFull.exitCode == 1);
    auto strip_times = [](const std::string& text) {
        std::string out;
        bool skipping = false;
        for (char c : text) {
            if (c == '@') skipping = true;
            if (skipping && (c == ' ' || c == '\n')) skipping = false;
            if (!skipping) out += c;
        }
        return out;
    };
    CHECK(strip_times(checkFull.out) == strip_times(check.out));
}

TEST_CASE("pipeline diagnose defaults and satisfied specifications") {
    fs::path dir = work_dir();
    fs::path diagnosis = dir / "pipeline.json";
    auto result = run_cli("diagnose --program " + fixture("kmg.mp") + " --spec " +
                          fixture("y_bound.icftl") + " --entry k --out " + diagnosis.string());
    CHECK(result.exitCode == 1);
    CHECK(result.out.find("diagnosis: 1 slice(s), 8 program point(s)") != std::string::npos);

    fs::path satisfied = dir / "satisfied.icftl";
    std::ofstream(satisfied) << "forall q in changes(y).during(g) : q(y) < 100\n";
    auto ok = run_cli("diagnose --program " + fixture("kmg.mp") + " --spec " +
                      satisfied.string() + " --entry k --out " + (dir / "ok.json").string());
    CHECK(ok.exitCode == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "ok.json")).empty());
}

TEST_CASE("metrics prints the level table and reduction ratios") {
    fs::path dir = work_dir();
    fs::path plan = dir / "plan.json";
    run_cli("instrument --program " + fixture("kmg.mp") + " --spec " + fixture("y_bound.icftl") +
            " --out " + plan.string());

    fs::path gt = dir / "gt.json";
    std::ofstream(gt) << R"([
        {"proc": "g", "line": 18, "proximity": 0},
        {"proc": "g", "line": 16, "proximity": 0},
        {"proc": "g", "line": 14, "proximity": 0},
        {"proc": "g", "line": 12, "proximity": 0},
        {"proc": "m", "line": 9, "proximity": 1},
        {"proc": "k", "line": 6, "proximity": 2},
        {"proc": "k", "line": 4, "proximity": 2},
        {"proc": "k", "line": 2, "proximity": 2}
    ])";
    auto result = run_cli("metrics --predicted " + plan.string() + " --gt " + gt.string() +
                          " --levels 0,1,5,inf --program " + fixture("kmg.mp") + " --spec " +
                          fixture("y_bound.icftl"));
    CHECK(result.exitCode == 0);
    CHECK(result.out.find("level") != std::string::npos);
    CHECK(result.out.find("inf") != std::string::npos);
    CHECK(result.out.find("1.000") != std::string::npos);
    CHECK(result.out.find("CR_sloc 0.467") != std::string::npos);
    CHECK(result.out.find("CR_func 0.000") != std::string::npos);
}

TEST_CASE("gen emits parseable programs") {
    fs::path dir = work_dir();
    fs::path prog = dir / "gen.mp";
    CHECK(run_cli("gen --seed 7 --out " + prog.string()).exitCode == 0);
    CHECK_NOTHROW(icftl::miniproc::parse_program(slurp(prog)));
    auto a = run_cli("gen --seed 7");
    auto b = run_cli("gen --seed 7");
    CHECK(a.out == b.out);
}
