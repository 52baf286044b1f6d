#include "icftl/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "json.hpp"

#include "icftl/errors.hpp"

namespace icftl::runtime {

using miniproc::AssignStmt;
using miniproc::CallStmt;
using miniproc::Expr;
using miniproc::ForInStmt;
using miniproc::IfElseStmt;
using miniproc::Procedure;
using miniproc::Statement;

Timestamp Timestamp::parse(const std::string& text) {
    std::size_t i = 0;
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
        throw std::invalid_argument("bad timestamp '" + text + "'");
    std::int64_t whole = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > 9'000'000'000'000) throw std::invalid_argument("timestamp too large");
        ++i;
    }
    std::int64_t frac = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        int digits = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (++digits > 6) throw std::invalid_argument("timestamp precision beyond 1e-6");
            frac = frac * 10 + (text[i] - '0');
            ++i;
        }
        if (digits == 0) throw std::invalid_argument("bad timestamp '" + text + "'");
        for (; digits < 6; ++digits) frac *= 10;
    }
    if (i != text.size()) throw std::invalid_argument("bad timestamp '" + text + "'");
    return Timestamp{whole * 1'000'000 + frac};
}

std::string Timestamp::str() const {
    std::int64_t whole = micros / 1'000'000;
    std::int64_t frac = micros % 1'000'000;
    std::string out = std::to_string(whole) + ".";
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    return out + digits;
}

std::size_t IotaTrace::event_count() const {
    std::size_t n = 0;
    for (const DynamicRun& run : runs) n += run.events.size();
    return n;
}

// ---------------------------------------------------------------------------
// Interpreter

namespace {

constexpr std::int64_t kTick = 100'000;  // 0.1 per recorded event

struct Interp {
    const miniproc::SystemOfProcedures& system;
    ExecOptions opts;
    IotaTrace trace;
    std::int64_t tick = 0;
    int depth = 0;

    Timestamp next_t() { return Timestamp{(tick++) * kTick}; }

    std::int64_t eval(const Expr& e, const std::map<std::string, std::int64_t>& env,
                      const miniproc::ProgramPoint& at) {
        switch (e.kind) {
            case Expr::Kind::IntLit: return e.value;
            case Expr::Kind::VarRef: {
                auto it = env.find(e.name);
                if (it == env.end())
                    throw RuntimeError(at.procedure, at.line,
                                       "read of undefined variable '" + e.name + "'");
                return it->second;
            }
            case Expr::Kind::Binary: break;
        }
        std::int64_t l = eval(*e.lhs, env, at);
        std::int64_t r = eval(*e.rhs, env, at);
        std::int64_t out = 0;
        bool overflow = false;
        switch (e.op) {
            case miniproc::BinOp::Add: overflow = __builtin_add_overflow(l, r, &out); break;
            case miniproc::BinOp::Sub: overflow = __builtin_sub_overflow(l, r, &out); break;
            case miniproc::BinOp::Mul: overflow = __builtin_mul_overflow(l, r, &out); break;
            case miniproc::BinOp::Lt: out = l < r; break;
            case miniproc::BinOp::Gt: out = l > r; break;
            case miniproc::BinOp::Eq: out = l == r; break;
        }
        if (overflow)
            throw RuntimeError(at.procedure, at.line, "arithmetic overflow");
        return out;
    }

    void record(std::size_t run, std::optional<int> line,
                std::map<std::string, std::int64_t> values) {
        trace.runs[run].events.push_back(TraceEvent{next_t(), line, std::move(values)});
    }

    std::size_t activate(const Procedure& proc, const std::vector<std::int64_t>& args) {
        if (++depth > opts.maxCallDepth) throw DepthExceeded(opts.maxCallDepth);
        std::size_t run = trace.runs.size();
        trace.runs.emplace_back();
        trace.labels.push_back(proc.name);
        trace.procedures.insert(proc.name);

        std::map<std::string, std::int64_t> env;
        for (std::size_t i = 0; i < proc.params.size(); ++i) env[proc.params[i]] = args[i];
        record(run, std::nullopt, env);  // entry event carries the parameter values

        exec_block(proc.body, env, run);
        --depth;
        return run;
    }

    void exec_block(const std::vector<Statement>& body,
                    std::map<std::string, std::int64_t>& env, std::size_t run) {
        for (const Statement& s : body) exec_statement(s, env, run);
    }

    void exec_statement(const Statement& s, std::map<std::string, std::int64_t>& env,
                        std::size_t run) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            std::int64_t v = eval(*a->value, env, s.point);
            env[a->target] = v;
            record(run, s.point.line, {{a->target, v}});
            return;
        }
        if (const auto* call = std::get_if<CallStmt>(&s.node)) {
            std::vector<std::int64_t> args;
            for (const auto& arg : call->args) {
                if (const auto* name = std::get_if<std::string>(&arg)) {
                    auto it = env.find(*name);
                    if (it == env.end())
                        throw RuntimeError(s.point.procedure, s.point.line,
                                           "read of undefined variable '" + *name + "'");
                    args.push_back(it->second);
                } else {
                    args.push_back(std::get<std::int64_t>(arg));
                }
            }
            activate(system.at(call->callee), args);
            // The call's own state is recorded after the callee completes.
            record(run, s.point.line, {});
            return;
        }
        if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            for (std::int64_t item : loop->items) {
                env[loop->loopVar] = item;
                record(run, s.point.line, {{loop->loopVar, item}});
                exec_block(loop->body, env, run);
            }
            if (opts.recordMarkers) record(run, loop->endLine, {});
            return;
        }
        const auto& cond = std::get<IfElseStmt>(s.node);
        std::int64_t c = eval(*cond.cond, env, s.point);
        if (opts.recordMarkers) record(run, s.point.line, {});
        if (c != 0) {
            exec_block(cond.thenBody, env, run);
        } else if (cond.elseBody) {
            if (opts.recordMarkers) record(run, cond.elseLine, {});
            exec_block(*cond.elseBody, env, run);
        }
        if (opts.recordMarkers) record(run, cond.endLine, {});
    }
};

}  // namespace

IotaTrace execute(const miniproc::SystemOfProcedures& system, const std::string& entry,
                  const std::vector<std::int64_t>& args, const ExecOptions& opts) {
    const Procedure& proc = system.at(entry);
    if (proc.params.size() != args.size())
        throw LinkError("entry procedure '" + entry + "' takes " +
                        std::to_string(proc.params.size()) + " arguments, got " +
                        std::to_string(args.size()));
    Interp interp{system, opts, {}, 0, 0};
    interp.activate(proc, args);
    return std::move(interp.trace);
}

FSlice filter_trace(const IotaTrace& trace, const std::set<miniproc::ProgramPoint>& points) {
    FSlice slice;
    for (std::size_t i = 0; i < trace.runs.size(); ++i) {
        DynamicRun filtered;
        for (const TraceEvent& e : trace.runs[i].events) {
            if (!e.line) continue;  // entry events never match statement points
            if (points.count(miniproc::ProgramPoint{trace.labels[i], *e.line, 0}))
                filtered.events.push_back(e);
        }
        if (filtered.events.empty()) continue;
        slice.trace.runs.push_back(std::move(filtered));
        slice.trace.labels.push_back(trace.labels[i]);
        slice.trace.procedures.insert(trace.labels[i]);
        slice.origin.push_back(i);
    }
    return slice;
}

// ---------------------------------------------------------------------------
// JSON Lines serialization

std::string write_trace(const IotaTrace& trace) {
    nlohmann::json procedures = nlohmann::json::array();
    for (const std::string& p : trace.procedures) procedures.push_back(p);
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < trace.labels.size(); ++i)
        labels[std::to_string(i)] = trace.labels[i];
    std::string out =
        nlohmann::json{{"procedures", procedures}, {"labels", labels}}.dump() + "\n";

    // Events interleaved in global timestamp order.
    std::vector<std::size_t> next(trace.runs.size(), 0);
    for (;;) {
        std::size_t best = trace.runs.size();
        for (std::size_t i = 0; i < trace.runs.size(); ++i) {
            if (next[i] >= trace.runs[i].events.size()) continue;
            if (best == trace.runs.size() ||
                trace.runs[i].events[next[i]].t < trace.runs[best].events[next[best]].t)
                best = i;
        }
        if (best == trace.runs.size()) break;
        const TraceEvent& e = trace.runs[best].events[next[best]++];
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [k, v] : e.values) values[k] = v;
        nlohmann::json obj = {{"run", best},
                              {"proc", trace.labels[best]},
                              {"t", e.t.str()},
                              {"line", e.line ? nlohmann::json(*e.line) : nlohmann::json()},
                              {"values", values}};
        out += obj.dump() + "\n";
    }
    return out;
}

IotaTrace read_trace(const std::string& text) {
    std::istringstream in(text);
    std::string lineText;
    int lineNo = 0;
    IotaTrace trace;
    bool headerSeen = false;
    Timestamp lastT{-1};

    while (std::getline(in, lineText)) {
        ++lineNo;
        if (lineText.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(lineText);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(lineNo, std::string("invalid JSON: ") + e.what());
        }
        try {
            if (!headerSeen) {
                for (const auto& p : obj.at("procedures"))
                    trace.procedures.insert(p.get<std::string>());
                const auto& labels = obj.at("labels");
                trace.labels.resize(labels.size());
                trace.runs.resize(labels.size());
                for (const auto& [key, value] : labels.items()) {
                    std::size_t idx = 0;
                    try {
                        std::size_t used = 0;
                        idx = std::stoul(key, &used);
                        if (used != key.size()) throw std::invalid_argument(key);
                    } catch (const std::exception&) {
                        throw FormatError(lineNo, "label key '" + key + "' is not a run index");
                    }
                    if (idx >= trace.labels.size())
                        throw FormatError(lineNo, "non-contiguous run indices in labels");
                    trace.labels[idx] = value.get<std::string>();
                }
                for (const std::string& label : trace.labels)
                    if (!trace.procedures.count(label))
                        throw FormatError(lineNo, "label '" + label +
                                                      "' missing from procedures");
                headerSeen = true;
                continue;
            }
            std::size_t run = obj.at("run").get<std::size_t>();
            if (run >= trace.runs.size()) throw FormatError(lineNo, "run index out of range");
            if (obj.at("proc").get<std::string>() != trace.labels[run])
                throw FormatError(lineNo, "event proc disagrees with run label");
            TraceEvent event;
            try {
                event.t = Timestamp::parse(obj.at("t").get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw FormatError(lineNo, e.what());
            }
            if (event.t <= lastT)
                throw FormatError(lineNo, "timestamps must increase strictly");
            lastT = event.t;
            if (!obj.at("line").is_null()) event.line = obj.at("line").get<int>();
            for (const auto& [k, v] : obj.at("values").items())
                event.values[k] = v.get<std::int64_t>();
            trace.runs[run].events.push_back(std::move(event));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(lineNo, std::string("invalid trace record: ") + e.what());
        }
    }
    if (!headerSeen && lineNo > 0) throw FormatError(1, "missing trace header");
    if (!headerSeen) throw FormatError(0, "empty trace");
    return trace;
}

}  // namespace icftl::runtime
