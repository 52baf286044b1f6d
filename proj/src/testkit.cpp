#include "icftl/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "icftl/errors.hpp"

namespace icftl::testkit {

using miniproc::AssignStmt;
using miniproc::CallStmt;
using miniproc::Expr;
using miniproc::ExprPtr;
using miniproc::ForInStmt;
using miniproc::IfElseStmt;
using miniproc::Procedure;
using miniproc::ProgramPoint;
using miniproc::Statement;
using miniproc::SystemOfProcedures;

namespace {

// mt19937_64 outputs reduced by modulo; std::uniform_int_distribution is
// not portable across standard libraries.
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed * 0x9e3779b97f4a7c15ULL + 1) {}

    int below(int n) { return static_cast<int>(engine() % static_cast<std::uint64_t>(n)); }
    bool chance(int pct) { return below(100) < pct; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
    }
};

// ---------------------------------------------------------------------------
// Program generator

struct ProcSignature {
    std::string name;
    std::vector<std::string> params;
};

struct Generator {
    GenConfig config;
    Rng rng;
    std::vector<ProcSignature> signatures;

    explicit Generator(const GenConfig& c) : config(c), rng(c.seed) {}

    SystemOfProcedures run() {
        int nprocs = 1 + rng.below(std::max(1, config.maxProcs));
        for (int i = 0; i < nprocs; ++i) {
            ProcSignature sig;
            sig.name = "p" + std::to_string(i);
            int nparams = i == 0 ? 0 : rng.below(3);
            for (int p = 0; p < nparams; ++p) sig.params.push_back("a" + std::to_string(p));
            signatures.push_back(std::move(sig));
        }
        SystemOfProcedures system;
        for (int i = 0; i < nprocs; ++i) {
            Procedure proc;
            proc.name = signatures[static_cast<std::size_t>(i)].name;
            proc.params = signatures[static_cast<std::size_t>(i)].params;
            std::set<std::string> defined(proc.params.begin(), proc.params.end());
            int budget = 2 + rng.below(std::max(1, config.maxStmtsPerProc - 1));
            proc.body = gen_block(i, budget, defined, config.maxBlockDepth, i == 0);
            system.procedures.emplace(proc.name, std::move(proc));
        }
        return system;
    }

    ExprPtr gen_operand(const std::set<std::string>& defined) {
        if (defined.empty() || rng.chance(40)) return Expr::lit(rng.below(10));
        std::vector<std::string> vars(defined.begin(), defined.end());
        return Expr::var(rng.pick(vars));
    }

    ExprPtr gen_arith(const std::set<std::string>& defined, int depth) {
        if (depth == 0 || rng.chance(35)) return gen_operand(defined);
        int r = rng.below(10);
        miniproc::BinOp op = r < 4   ? miniproc::BinOp::Add
                             : r < 8 ? miniproc::BinOp::Sub
                                     : miniproc::BinOp::Mul;
        return Expr::bin(op, gen_arith(defined, depth - 1), gen_arith(defined, depth - 1));
    }

    ExprPtr gen_condition(const std::set<std::string>& defined) {
        int r = rng.below(3);
        miniproc::BinOp op = r == 0   ? miniproc::BinOp::Lt
                             : r == 1 ? miniproc::BinOp::Gt
                                      : miniproc::BinOp::Eq;
        return Expr::bin(op, gen_arith(defined, 1), gen_arith(defined, 1));
    }

    std::string pick_target(int procIdx, const std::set<std::string>& defined) {
        std::vector<std::string> locals;
        for (const std::string& v : defined)
            if (v[0] == 'v') locals.push_back(v);
        if (!locals.empty() && rng.chance(45)) return rng.pick(locals);
        return "v" + std::to_string(rng.below(4 + procIdx % 3));
    }

    // Generates a block and extends `defined` with the variables assigned on
    // every path through it.
    std::vector<Statement> gen_block(int procIdx, int budget, std::set<std::string>& defined,
                                     int depth, bool forceLeadingAssign) {
        std::vector<Statement> body;
        bool first = true;
        while (budget > 0) {
            int r = rng.below(100);
            if (first && forceLeadingAssign) r = 0;
            first = false;

            if (r < 50 || budget < 2 || depth == 0) {
                AssignStmt node;
                node.target = pick_target(procIdx, defined);
                node.value = gen_arith(defined, 2);
                defined.insert(node.target);
                body.push_back(make(std::move(node)));
                budget -= 1;
                continue;
            }
            if (r < 65) {
                int callee = callee_for(procIdx);
                if (callee >= 0) {
                    CallStmt node;
                    node.callee = signatures[static_cast<std::size_t>(callee)].name;
                    for (std::size_t p = 0;
                         p < signatures[static_cast<std::size_t>(callee)].params.size(); ++p) {
                        if (!defined.empty() && rng.chance(70)) {
                            std::vector<std::string> vars(defined.begin(), defined.end());
                            node.args.emplace_back(rng.pick(vars));
                        } else {
                            node.args.emplace_back(static_cast<std::int64_t>(rng.below(10)));
                        }
                    }
                    body.push_back(make(std::move(node)));
                    budget -= 1;
                    continue;
                }
                r = 70;  // no callable target; fall through to a block statement
            }
            if (r < 85 && config.allowLoops) {
                ForInStmt node;
                node.loopVar = "i" + std::to_string(rng.below(3));
                int items = 1 + rng.below(std::max(1, config.loopMax));
                for (int i = 0; i < items; ++i)
                    node.items.push_back(static_cast<std::int64_t>(rng.below(10)));
                std::set<std::string> inner = defined;
                inner.insert(node.loopVar);
                int bodyBudget = 1 + rng.below(std::min(3, budget - 1));
                node.body = gen_block(procIdx, bodyBudget, inner, depth - 1, true);
                budget -= bodyBudget + 1;
                // Non-empty item lists run the body at least once.
                defined = std::move(inner);
                body.push_back(make(std::move(node)));
                continue;
            }
            {
                IfElseStmt node;
                node.cond = gen_condition(defined);
                bool hasElse = rng.chance(70);
                int thenBudget = 1 + rng.below(std::min(3, std::max(1, budget - 1)));
                std::set<std::string> thenDefined = defined;
                node.thenBody = gen_block(procIdx, thenBudget, thenDefined, depth - 1, true);
                budget -= thenBudget + 1;
                if (hasElse && budget > 0) {
                    int elseBudget = 1 + rng.below(std::min(3, budget));
                    std::set<std::string> elseDefined = defined;
                    node.elseBody = gen_block(procIdx, elseBudget, elseDefined, depth - 1, true);
                    budget -= elseBudget;
                    for (const std::string& v : thenDefined)
                        if (elseDefined.count(v)) defined.insert(v);
                }
                body.push_back(make(std::move(node)));
            }
        }
        return body;
    }

    int callee_for(int procIdx) {
        int n = static_cast<int>(signatures.size());
        if (config.allowRecursion) return rng.below(n);
        if (procIdx + 1 >= n) return -1;
        return procIdx + 1 + rng.below(n - procIdx - 1);
    }

    static Statement make(AssignStmt node) {
        Statement s;
        s.node = std::move(node);
        return s;
    }
    static Statement make(CallStmt node) {
        Statement s;
        s.node = std::move(node);
        return s;
    }
    static Statement make(ForInStmt node) {
        Statement s;
        s.node = std::move(node);
        return s;
    }
    static Statement make(IfElseStmt node) {
        Statement s;
        s.node = std::move(node);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Abstract magnitude check: walks the program exactly (loop items and call
// targets are static) tracking an upper bound on |value| per variable, with
// branches joined by max. Keeps the executed corpus clear of int64 overflow.

constexpr double kMagLimit = 1e17;

struct MagCheck {
    const SystemOfProcedures& system;
    bool ok = true;

    double expr(const Expr& e, const std::map<std::string, double>& env) {
        switch (e.kind) {
            case Expr::Kind::IntLit: return std::abs(static_cast<double>(e.value));
            case Expr::Kind::VarRef: {
                auto it = env.find(e.name);
                return it == env.end() ? 0.0 : it->second;
            }
            case Expr::Kind::Binary: break;
        }
        double l = expr(*e.lhs, env);
        double r = expr(*e.rhs, env);
        switch (e.op) {
            case miniproc::BinOp::Add:
            case miniproc::BinOp::Sub: return l + r;
            case miniproc::BinOp::Mul: return l * r;
            default: return 1.0;
        }
    }

    void block(const std::vector<Statement>& body, std::map<std::string, double>& env) {
        for (const Statement& s : body) {
            if (!ok) return;
            if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
                double m = expr(*a->value, env);
                if (m > kMagLimit) ok = false;
                env[a->target] = m;
            } else if (const auto* call = std::get_if<CallStmt>(&s.node)) {
                std::map<std::string, double> callee;
                const Procedure& target = system.at(call->callee);
                for (std::size_t i = 0; i < call->args.size(); ++i) {
                    if (const auto* name = std::get_if<std::string>(&call->args[i]))
                        callee[target.params[i]] = env.count(*name) ? env.at(*name) : 0.0;
                    else
                        callee[target.params[i]] =
                            std::abs(static_cast<double>(std::get<std::int64_t>(call->args[i])));
                }
                block(target.body, callee);
            } else if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
                for (std::int64_t item : loop->items) {
                    env[loop->loopVar] = std::abs(static_cast<double>(item));
                    block(loop->body, env);
                    if (!ok) return;
                }
            } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
                std::map<std::string, double> thenEnv = env;
                block(cond->thenBody, thenEnv);
                std::map<std::string, double> elseEnv = env;
                if (cond->elseBody) block(*cond->elseBody, elseEnv);
                for (const auto& [k, v] : thenEnv) env[k] = std::max(env.count(k) ? env[k] : 0.0, v);
                for (const auto& [k, v] : elseEnv) env[k] = std::max(env.count(k) ? env[k] : 0.0, v);
            }
        }
    }

    bool check(const std::string& entry) {
        std::map<std::string, double> env;
        block(system.at(entry).body, env);
        return ok;
    }
};

}  // namespace

SystemOfProcedures gen_program(const GenConfig& config) {
    GenConfig attempt = config;
    for (int tries = 0; tries < 64; ++tries) {
        SystemOfProcedures built = Generator(attempt).run();
        // Canonicalize program points (and self-check) through the parser.
        SystemOfProcedures system = miniproc::parse_program(miniproc::pretty_print(built));
        if (config.allowRecursion) return system;  // never executed; skip the bound check
        if (MagCheck{system}.check("p0")) return system;
        attempt.seed = attempt.seed * 6364136223846793005ULL + 1442695040888963407ULL;
    }
    throw InvariantViolation("gen_program could not build an overflow-safe system");
}

// ---------------------------------------------------------------------------
// Specification generator

namespace {

void collect_written(const std::vector<Statement>& body, const std::string& proc,
                     std::vector<std::pair<std::string, std::string>>& out) {
    for (const Statement& s : body) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            out.emplace_back(proc, a->target);
        } else if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            out.emplace_back(proc, loop->loopVar);
            collect_written(loop->body, proc, out);
        } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
            collect_written(cond->thenBody, proc, out);
            if (cond->elseBody) collect_written(*cond->elseBody, proc, out);
        }
    }
}

}  // namespace

specs::Specification gen_spec(const SystemOfProcedures& system, std::uint64_t seed) {
    std::vector<std::pair<std::string, std::string>> candidates;
    for (const auto& [name, proc] : system.procedures)
        collect_written(proc.body, name, candidates);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.empty())
        throw InvariantViolation("system writes no variables; cannot generate a specification");

    Rng rng(seed ^ 0xabcdef12345ULL);
    auto quant = rng.pick(candidates);
    int nquant = rng.chance(20) && candidates.size() > 1 ? 2 : 1;
    std::vector<std::pair<std::string, std::string>> quants{quant};
    if (nquant == 2) quants.push_back(rng.pick(candidates));

    std::string text;
    const char* vars[2] = {"q", "r"};
    for (int i = 0; i < nquant; ++i) {
        if (i) text += ", ";
        text += std::string("forall ") + vars[i] + " in changes(" + quants[i].second +
                ").during(" + quants[i].first + ")";
    }
    text += " : ";

    auto gen_atom = [&](int quantIdx) {
        const char* var = vars[quantIdx];
        const auto& [proc, changed] = quants[static_cast<std::size_t>(quantIdx)];
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        std::string op = ops[rng.below(6)];
        std::string constant = std::to_string(rng.below(36) - 5);
        if (rng.chance(35)) {
            auto target = rng.pick(candidates);
            return std::string(var) + ".next(changes(" + target.second + ").during(" +
                   target.first + ")) " + op + " " + constant;
        }
        return std::string(var) + "(" + changed + ") " + op + " " + constant;
    };

    int natoms = 1 + rng.below(3);
    for (int i = 0; i < natoms; ++i) {
        if (i) text += rng.chance(75) ? " and " : " or ";
        if (rng.chance(10)) text += "not ";
        text += gen_atom(nquant == 2 && rng.chance(40) ? 1 : 0);
    }
    return specs::parse_spec(text);
}

// ---------------------------------------------------------------------------
// Relevance oracle

namespace {

struct ONode {
    ProgramPoint point;
    bool isEntry = false;
    std::set<std::string> written;
    std::set<std::string> read;
    const CallStmt* call = nullptr;
    std::vector<int> incoming;  // marker-free backward predecessors
};

struct OProc {
    std::string name;
    std::vector<std::string> params;
    std::vector<ONode> nodes;
};

struct OGraph {
    std::map<std::string, OProc> procs;
    // callee -> (caller proc, node index of the call)
    std::map<std::string, std::vector<std::pair<std::string, int>>> callers;
};

struct OBuilder {
    OProc proc;

    int add(ONode node, const std::vector<int>& incoming) {
        node.incoming = incoming;
        proc.nodes.push_back(std::move(node));
        return static_cast<int>(proc.nodes.size()) - 1;
    }

    // Returns the block's exit nodes: the last real states control can be in
    // after the block (several after a conditional join).
    std::vector<int> block(const std::vector<Statement>& body, std::vector<int> preds) {
        for (const Statement& s : body) preds = statement(s, std::move(preds));
        return preds;
    }

    std::vector<int> statement(const Statement& s, std::vector<int> preds) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            ONode node;
            node.point = s.point;
            node.written.insert(a->target);
            node.read = miniproc::vars_of(*a->value);
            return {add(std::move(node), preds)};
        }
        if (const auto* call = std::get_if<CallStmt>(&s.node)) {
            ONode node;
            node.point = s.point;
            node.call = call;
            for (const auto& arg : call->args)
                if (const auto* name = std::get_if<std::string>(&arg)) node.read.insert(*name);
            return {add(std::move(node), preds)};
        }
        if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            ONode header;
            header.point = s.point;
            header.written.insert(loop->loopVar);
            int headerId = add(std::move(header), preds);
            std::vector<int> last = block(loop->body, {headerId});
            // The states after the loop see the body's last states only; the
            // body's first states see the header, the header the pre-loop
            // state, so each body is walked exactly once backward.
            return last;
        }
        const auto& cond = std::get<IfElseStmt>(s.node);
        ONode header;
        header.point = s.point;
        header.read = miniproc::vars_of(*cond.cond);
        std::string procName = s.point.procedure;
        int headerId = add(std::move(header), preds);
        std::vector<int> exits = block(cond.thenBody, {headerId});
        std::vector<int> elseExits{headerId};
        if (cond.elseBody) {
            // The else line is its own (transparent) state, so an empty else
            // branch still contributes a distinct backward path.
            ONode marker;
            marker.point = ProgramPoint{procName, cond.elseLine, 0};
            int markerId = add(std::move(marker), {headerId});
            elseExits = block(*cond.elseBody, {markerId});
        }
        for (int e : elseExits)
            if (std::find(exits.begin(), exits.end(), e) == exits.end()) exits.push_back(e);
        return exits;
    }
};

OGraph build_ograph(const SystemOfProcedures& system) {
    OGraph graph;
    for (const auto& [name, proc] : system.procedures) {
        OBuilder builder;
        builder.proc.name = name;
        builder.proc.params = proc.params;
        ONode entry;
        entry.point = ProgramPoint{name, proc.defLine, 0};
        entry.isEntry = true;
        entry.written.insert(proc.params.begin(), proc.params.end());
        int entryId = builder.add(std::move(entry), {});
        builder.block(proc.body, {entryId});
        graph.procs.emplace(name, std::move(builder.proc));
    }
    for (const auto& [name, oproc] : graph.procs)
        for (std::size_t i = 0; i < oproc.nodes.size(); ++i)
            if (oproc.nodes[i].call)
                graph.callers[oproc.nodes[i].call->callee].emplace_back(name,
                                                                        static_cast<int>(i));
    return graph;
}

struct OConfig {
    ProgramPoint point;
    std::set<std::string> used;

    bool operator==(const OConfig&) const = default;
};

struct OTask {
    const OProc* proc;
    int node;
    std::set<std::string> used;
    std::vector<OConfig> path;
};

}  // namespace

instrument::MultiplicityMultiset oracle_relevance(const ProgramPoint& seedPoint,
                                                  const SystemOfProcedures& system) {
    OGraph graph = build_ograph(system);
    auto procIt = graph.procs.find(seedPoint.procedure);
    if (procIt == graph.procs.end())
        throw InvariantViolation("seed procedure '" + seedPoint.procedure + "' not found");
    const OProc* seedProc = &procIt->second;
    int seedNode = -1;
    for (std::size_t i = 0; i < seedProc->nodes.size(); ++i)
        if (!seedProc->nodes[i].isEntry && seedProc->nodes[i].point == seedPoint)
            seedNode = static_cast<int>(i);
    if (seedNode < 0)
        throw InvariantViolation("seed " + miniproc::to_string(seedPoint) + " not found");

    instrument::MultiplicityMultiset counts;
    counts.mu[seedPoint] = 1;

    std::vector<OTask> stack;
    const std::set<std::string>& seedRead = seedProc->nodes[static_cast<std::size_t>(seedNode)].read;
    stack.push_back({seedProc, seedNode, seedRead, {OConfig{seedPoint, seedRead}}});

    while (!stack.empty()) {
        OTask task = std::move(stack.back());
        stack.pop_back();
        if (task.used.empty()) continue;

        const ONode& node = task.proc->nodes[static_cast<std::size_t>(task.node)];
        for (int predId : node.incoming) {
            const ONode& pred = task.proc->nodes[static_cast<std::size_t>(predId)];
            std::set<std::string> u = task.used;

            if (pred.isEntry) {
                std::vector<std::string> live;
                for (const std::string& p : task.proc->params)
                    if (u.count(p)) live.push_back(p);
                if (live.empty()) continue;
                auto callersIt = graph.callers.find(task.proc->name);
                if (callersIt == graph.callers.end()) continue;
                for (const auto& [callerName, callNode] : callersIt->second) {
                    const OProc* caller = &graph.procs.at(callerName);
                    const ONode& site = caller->nodes[static_cast<std::size_t>(callNode)];
                    std::set<std::string> renamed;
                    for (const std::string& w : live) {
                        std::size_t idx = 0;
                        while (task.proc->params[idx] != w) ++idx;
                        const auto& arg = site.call->args[idx];
                        if (const auto* name = std::get_if<std::string>(&arg))
                            renamed.insert(*name);
                    }
                    if (renamed.empty()) continue;
                    OConfig cfg{site.point, renamed};
                    if (std::find(task.path.begin(), task.path.end(), cfg) != task.path.end())
                        continue;
                    OTask next{caller, callNode, std::move(renamed), task.path};
                    next.path.push_back(std::move(cfg));
                    stack.push_back(std::move(next));
                }
                continue;
            }

            bool relevant = false;
            for (const std::string& w : pred.written)
                if (u.count(w)) relevant = true;
            if (relevant) {
                counts.mu[pred.point] += 1;
                for (const std::string& w : pred.written) u.erase(w);
                if (u.empty() && pred.read.empty()) continue;
                u.insert(pred.read.begin(), pred.read.end());
            }
            if (u.empty()) continue;
            OConfig cfg{pred.point, u};
            if (std::find(task.path.begin(), task.path.end(), cfg) != task.path.end()) continue;
            OTask next{task.proc, predId, std::move(u), task.path};
            next.path.push_back(std::move(cfg));
            stack.push_back(std::move(next));
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Reference evaluator

namespace {

std::int64_t ref_expr(const Expr& e, const std::map<std::string, std::int64_t>& env,
                      const ProgramPoint& at) {
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
    std::int64_t l = ref_expr(*e.lhs, env, at);
    std::int64_t r = ref_expr(*e.rhs, env, at);
    switch (e.op) {
        case miniproc::BinOp::Add: return l + r;
        case miniproc::BinOp::Sub: return l - r;
        case miniproc::BinOp::Mul: return l * r;
        case miniproc::BinOp::Lt: return l < r;
        case miniproc::BinOp::Gt: return l > r;
        case miniproc::BinOp::Eq: return l == r;
    }
    return 0;
}

void ref_block(const SystemOfProcedures& system, const std::vector<Statement>& body,
               std::map<std::string, std::int64_t>& env);

void ref_statement(const SystemOfProcedures& system, const Statement& s,
                   std::map<std::string, std::int64_t>& env) {
    if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
        env[a->target] = ref_expr(*a->value, env, s.point);
    } else if (const auto* call = std::get_if<CallStmt>(&s.node)) {
        const Procedure& target = system.at(call->callee);
        std::map<std::string, std::int64_t> callee;
        for (std::size_t i = 0; i < call->args.size(); ++i) {
            if (const auto* name = std::get_if<std::string>(&call->args[i])) {
                auto it = env.find(*name);
                if (it == env.end())
                    throw RuntimeError(s.point.procedure, s.point.line,
                                       "read of undefined variable '" + *name + "'");
                callee[target.params[i]] = it->second;
            } else {
                callee[target.params[i]] = std::get<std::int64_t>(call->args[i]);
            }
        }
        ref_block(system, target.body, callee);
    } else if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
        for (std::int64_t item : loop->items) {
            env[loop->loopVar] = item;
            ref_block(system, loop->body, env);
        }
    } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
        if (ref_expr(*cond->cond, env, s.point) != 0)
            ref_block(system, cond->thenBody, env);
        else if (cond->elseBody)
            ref_block(system, *cond->elseBody, env);
    }
}

void ref_block(const SystemOfProcedures& system, const std::vector<Statement>& body,
               std::map<std::string, std::int64_t>& env) {
    for (const Statement& s : body) ref_statement(system, s, env);
}

}  // namespace

std::map<std::string, std::int64_t> reference_eval(const SystemOfProcedures& system,
                                                   const std::string& entry,
                                                   const std::vector<std::int64_t>& args) {
    const Procedure& proc = system.at(entry);
    std::map<std::string, std::int64_t> env;
    for (std::size_t i = 0; i < proc.params.size(); ++i) env[proc.params[i]] = args[i];
    ref_block(system, proc.body, env);
    return env;
}

}  // namespace icftl::testkit
