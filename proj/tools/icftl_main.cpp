// icftl — trace checking and violation diagnostics for MiniProc programs.
//
// Subcommands cover the pipeline end to end: scfg (graph export),
// instrument (plan computation), run (traced execution), check
// (verdicts), diagnose (annotated slices), metrics (precision/recall and
// complexity reduction), gen (random program corpus).

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "icftl/diagnose.hpp"
#include "icftl/errors.hpp"
#include "icftl/instrument.hpp"
#include "icftl/metrics.hpp"
#include "icftl/miniproc.hpp"
#include "icftl/monitor.hpp"
#include "icftl/runtime.hpp"
#include "icftl/scfg.hpp"
#include "icftl/specs.hpp"
#include "icftl/testkit.hpp"

namespace {

using namespace icftl;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write '" + path + "'");
    out << content;
}

void emit(const std::string& outPath, const std::string& content) {
    if (outPath.empty())
        std::cout << content;
    else
        write_file(outPath, content);
}

struct LoadedProgram {
    miniproc::SystemOfProcedures system;
    scfg::ScfgIndex scfgs;
};

LoadedProgram load_program(const std::string& path) {
    LoadedProgram p;
    p.system = miniproc::parse_program(read_file(path));
    p.scfgs = scfg::ScfgIndex::build(p.system);
    return p;
}

specs::Specification load_spec(const std::string& path, const LoadedProgram& program) {
    specs::Specification spec = specs::parse_spec(read_file(path));
    for (const std::string& warning : specs::link_spec(spec, program.system, program.scfgs))
        std::cerr << "warning: " << warning << "\n";
    return spec;
}

std::vector<std::int64_t> parse_args_list(const std::string& text) {
    std::vector<std::int64_t> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("cli", "--args expects comma-separated integers, got '" + item + "'");
        }
    }
    return out;
}

int print_verdicts(const runtime::IotaTrace& trace, const specs::Specification& spec,
                   const monitor::VerdictMap& verdicts) {
    for (std::size_t i = 0; i < verdicts.entries.size(); ++i) {
        const monitor::BindingVerdict& entry = verdicts.entries[i];
        std::cout << "binding#" << i << " "
                  << monitor::binding_signature(trace, spec, entry.binding) << " -> "
                  << (entry.value ? "true" : "false") << "\n";
    }
    return verdicts.all_satisfied() ? 0 : 1;
}

struct CommonPaths {
    std::string program, spec, trace, plan, out, gt;
    std::string entry;
    std::string args;
    std::string levels = "0,1,inf";
    std::string proc;
    bool all = false;
    bool executedOnly = false;
    std::uint64_t seed = 0;
};

int run_scfg(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    std::string out;
    if (!opt.proc.empty()) {
        out = scfg::export_dot(program.scfgs.at(opt.proc));
    } else {
        for (const auto& [name, graph] : program.scfgs.byProc) out += scfg::export_dot(graph);
    }
    emit(opt.out, out);
    return 0;
}

int run_instrument(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    specs::Specification spec = load_spec(opt.spec, program);
    instrument::InstrumentationPlan plan =
        instrument::build_plan(spec, program.system, program.scfgs);
    emit(opt.out, instrument::write_plan_json(plan));
    return 0;
}

int run_run(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    runtime::ExecOptions execOpts;
    execOpts.recordMarkers = opt.all;
    runtime::IotaTrace trace =
        runtime::execute(program.system, opt.entry, parse_args_list(opt.args), execOpts);
    if (!opt.plan.empty()) {
        instrument::InstrumentationPlan plan = instrument::read_plan_json(read_file(opt.plan));
        trace = runtime::filter_trace(trace, plan.unionPoints).trace;
    }
    emit(opt.out, runtime::write_trace(trace));
    return 0;
}

int run_check(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    specs::Specification spec = load_spec(opt.spec, program);
    runtime::IotaTrace trace = runtime::read_trace(read_file(opt.trace));
    monitor::VerdictMap verdicts = monitor::check(trace, spec, program.scfgs);
    return print_verdicts(trace, spec, verdicts);
}

int run_diagnose(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    specs::Specification spec = load_spec(opt.spec, program);

    instrument::InstrumentationPlan plan;
    if (!opt.plan.empty())
        plan = instrument::read_plan_json(read_file(opt.plan));
    else
        plan = instrument::build_plan(spec, program.system, program.scfgs);

    runtime::IotaTrace trace;
    if (!opt.trace.empty()) {
        trace = runtime::read_trace(read_file(opt.trace));
    } else {
        if (opt.entry.empty())
            throw Error("cli", "diagnose without --trace needs --entry to run the program");
        // Full pipeline: execute, then keep only the plan's points, exactly
        // what an instrumented run would have recorded.
        runtime::IotaTrace full =
            runtime::execute(program.system, opt.entry, parse_args_list(opt.args), {});
        trace = runtime::filter_trace(full, plan.unionPoints).trace;
    }

    monitor::VerdictMap verdicts = monitor::check(trace, spec, program.scfgs);
    diagnose::Diagnosis diag = diagnose::build_diagnosis(spec, trace, plan, program.scfgs);
    std::string outPath = opt.out.empty() ? "diagnosis.json" : opt.out;
    write_file(outPath, diagnose::write_diagnosis_json(diag, trace, spec));

    int code = print_verdicts(trace, spec, verdicts);
    std::set<miniproc::ProgramPoint> points =
        diagnose::diagnosis_points(diag, plan, opt.executedOnly);
    std::cout << "diagnosis: " << diag.entries.size() << " slice(s), " << points.size()
              << " program point(s), written to " << outPath << "\n";
    return code;
}

int run_metrics(const CommonPaths& opt) {
    LoadedProgram program = load_program(opt.program);
    specs::Specification spec = load_spec(opt.spec, program);
    instrument::InstrumentationPlan plan = instrument::read_plan_json(read_file(opt.plan));
    std::vector<metrics::GroundTruthEntry> gt = metrics::read_gt_json(read_file(opt.gt));

    std::vector<std::string> violationProcs;
    for (const specs::Quantifier& q : spec.quantifiers) violationProcs.push_back(q.proc);

    std::vector<metrics::Proximity> levels;
    std::stringstream ss(opt.levels);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf") {
            levels.push_back(metrics::Proximity::inf());
            continue;
        }
        try {
            levels.push_back(metrics::Proximity::at(std::stoi(item)));
        } catch (const std::exception&) {
            throw Error("cli", "--levels expects integers or 'inf', got '" + item + "'");
        }
    }

    std::cout << "level  TP  FP  FN  precision  recall\n";
    for (metrics::Proximity level : levels) {
        metrics::LevelStats stats = metrics::precision_recall(plan.unionPoints, gt, level,
                                                              violationProcs, program.system);
        std::printf("%-5s %4lld %3lld %3lld %10.3f %7.3f\n", level.str().c_str(),
                    static_cast<long long>(stats.tp), static_cast<long long>(stats.fp),
                    static_cast<long long>(stats.fn), stats.precision, stats.recall);
    }
    auto [crSloc, crFunc] = metrics::complexity_reduction(plan.unionPoints, program.system);
    std::printf("CR_sloc %.3f  CR_func %.3f\n", crSloc, crFunc);
    return 0;
}

int run_gen(const CommonPaths& opt) {
    testkit::GenConfig config;
    config.seed = opt.seed;
    miniproc::SystemOfProcedures system = testkit::gen_program(config);
    emit(opt.out, miniproc::pretty_print(system));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace checking and violation diagnostics for MiniProc programs"};
    app.set_version_flag("--version", "icftl 0.1.0");
    app.require_subcommand(1);

    CommonPaths opt;

    CLI::App* scfgCmd = app.add_subcommand("scfg", "export symbolic control-flow graphs as DOT");
    scfgCmd->add_option("--program", opt.program, "MiniProc source file")->required();
    scfgCmd->add_option("--proc", opt.proc, "procedure to export (default: all)");
    scfgCmd->add_flag("--dot", "DOT output (the only supported format)");
    scfgCmd->add_option("--out", opt.out, "output path (default: stdout)");

    CLI::App* instrumentCmd =
        app.add_subcommand("instrument", "compute the instrumentation plan for a specification");
    instrumentCmd->add_option("--program", opt.program)->required();
    instrumentCmd->add_option("--spec", opt.spec)->required();
    instrumentCmd->add_option("--out", opt.out, "plan path (default: stdout)");

    CLI::App* runCmd = app.add_subcommand("run", "execute a program and record its trace");
    runCmd->add_option("--program", opt.program)->required();
    runCmd->add_option("--entry", opt.entry, "entry procedure")->required();
    runCmd->add_option("--args", opt.args, "comma-separated integer arguments");
    runCmd->add_option("--points", opt.plan, "plan whose union filters the trace");
    runCmd->add_flag("--all", opt.all, "record if/else/end marker events too");
    runCmd->add_option("--out", opt.out, "trace path (default: stdout)");

    CLI::App* checkCmd = app.add_subcommand("check", "check a trace against a specification");
    checkCmd->add_option("--trace", opt.trace)->required();
    checkCmd->add_option("--spec", opt.spec)->required();
    checkCmd->add_option("--program", opt.program)->required();

    CLI::App* diagnoseCmd =
        app.add_subcommand("diagnose", "diagnose specification violations on a trace");
    diagnoseCmd->add_option("--program", opt.program)->required();
    diagnoseCmd->add_option("--spec", opt.spec)->required();
    diagnoseCmd->add_option("--trace", opt.trace, "recorded trace (default: run the program)");
    diagnoseCmd->add_option("--plan", opt.plan, "instrumentation plan (default: compute)");
    diagnoseCmd->add_option("--entry", opt.entry, "entry procedure for pipeline mode");
    diagnoseCmd->add_option("--args", opt.args, "entry arguments for pipeline mode");
    diagnoseCmd->add_flag("--executed-only", opt.executedOnly,
                          "report executed diagnosis points only");
    diagnoseCmd->add_option("--out", opt.out, "diagnosis path (default: diagnosis.json)");

    CLI::App* metricsCmd =
        app.add_subcommand("metrics", "precision/recall against a ground truth");
    metricsCmd->add_option("--predicted", opt.plan, "plan with the predicted points")->required();
    metricsCmd->add_option("--gt", opt.gt, "ground-truth JSON")->required();
    metricsCmd->add_option("--levels", opt.levels, "comma-separated proximities (int or inf)");
    metricsCmd->add_option("--program", opt.program)->required();
    metricsCmd->add_option("--spec", opt.spec)->required();

    CLI::App* genCmd = app.add_subcommand("gen", "generate a random MiniProc program");
    genCmd->add_option("--seed", opt.seed, "generator seed");
    genCmd->add_option("--out", opt.out, "program path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
    }

    try {
        if (app.got_subcommand(scfgCmd)) return run_scfg(opt);
        if (app.got_subcommand(instrumentCmd)) return run_instrument(opt);
        if (app.got_subcommand(runCmd)) return run_run(opt);
        if (app.got_subcommand(checkCmd)) return run_check(opt);
        if (app.got_subcommand(diagnoseCmd)) return run_diagnose(opt);
        if (app.got_subcommand(metricsCmd)) return run_metrics(opt);
        if (app.got_subcommand(genCmd)) return run_gen(opt);
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"phase", e.phase()}, {"detail", e.what()}}.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"phase", "internal"}, {"detail", e.what()}}.dump() << "\n";
        return 3;
    }
    return 2;
}
