#include "icftl/instrument.hpp"

#include <algorithm>

#include "json.hpp"

#include "icftl/errors.hpp"

namespace icftl::instrument {

using scfg::Scfg;
using scfg::ScfgIndex;
using scfg::StateKind;
using scfg::SymbolicState;

std::set<ProgramPoint> MultiplicityMultiset::support() const {
    std::set<ProgramPoint> out;
    for (const auto& [point, count] : mu) out.insert(point);
    return out;
}

std::int64_t MultiplicityMultiset::total() const {
    std::int64_t n = 0;
    for (const auto& [point, count] : mu) n += count;
    return n;
}

void MultiplicityMultiset::add(const MultiplicityMultiset& other) {
    for (const auto& [point, count] : other.mu) mu[point] += count;
}

MultiplicityMultiset to_multiset(const ExplanationList& items) {
    MultiplicityMultiset out;
    for (const SymbolicState* s : items) ++out.mu[s->point];
    return out;
}

std::set<ProgramPoint> quantifier_points(const specs::Quantifier& q,
                                         const ScfgIndex& scfgs) {
    std::set<ProgramPoint> out;
    for (const SymbolicState& v : scfgs.at(q.proc).vertices)
        if (!v.is_entry() && v.written.count(q.changedVar)) out.insert(v.point);
    return out;
}

std::set<ProgramPoint> vanilla_points(const specs::Specification& spec,
                                      const specs::ExpressionRef& ref,
                                      const ScfgIndex& scfgs) {
    const specs::Expression& expr = *ref.expr;
    if (expr.kind == specs::Expression::Kind::NextChange) {
        std::set<ProgramPoint> out;
        for (const SymbolicState& v : scfgs.at(expr.proc).vertices)
            if (!v.is_entry() && v.written.count(expr.programVar)) out.insert(v.point);
        return out;
    }
    // A value-at expression is decided at the bound state itself.
    for (const specs::Quantifier& q : spec.quantifiers)
        if (q.var == expr.bindingVar) return quantifier_points(q, scfgs);
    throw InvariantViolation("expression '" + expr.text() + "' has no quantifier");
}

std::vector<std::pair<std::string, const SymbolicState*>> callers_of(
    const std::string& proc, const ScfgIndex& scfgs) {
    std::vector<std::pair<std::string, const SymbolicState*>> out;
    for (const auto& [name, graph] : scfgs.byProc)
        for (const SymbolicState& v : graph.vertices)
            if (v.called.count(proc)) out.emplace_back(name, &v);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::pair(a.first, a.second->point) < std::pair(b.first, b.second->point);
    });
    return out;
}

int parameter_index(const miniproc::Procedure& proc, const std::string& param) {
    for (std::size_t i = 0; i < proc.params.size(); ++i)
        if (proc.params[i] == param) return static_cast<int>(i);
    throw NotAParameter("'" + param + "' is not a parameter of '" + proc.name + "'");
}

std::optional<std::string> try_renamed_parameter(const SymbolicState& callSite, int index) {
    const auto* call = std::get_if<miniproc::CallStmt>(&callSite.stmt->node);
    if (!call || index < 0 || static_cast<std::size_t>(index) >= call->args.size())
        throw InvariantViolation("call site " + miniproc::to_string(callSite.point) +
                                 " has no argument " + std::to_string(index));
    if (const auto* name = std::get_if<std::string>(&call->args[static_cast<std::size_t>(index)]))
        return *name;
    return std::nullopt;
}

std::string renamed_parameter(const SymbolicState& callSite, int index) {
    auto name = try_renamed_parameter(callSite, index);
    if (!name)
        throw LiteralArgument("argument " + std::to_string(index) + " of call at " +
                              miniproc::to_string(callSite.point) + " is a literal");
    return *name;
}

// ---------------------------------------------------------------------------
// Backward traversal

namespace {

struct PathConfig {
    ProgramPoint point;
    std::set<std::string> used;

    bool operator==(const PathConfig&) const = default;
};

struct Walker {
    const miniproc::SystemOfProcedures& system;
    const ScfgIndex& scfgs;
    ExplanationList out;
    std::vector<PathConfig> path;  // configurations on the current walk

    bool on_path(const PathConfig& cfg) const {
        return std::find(path.begin(), path.end(), cfg) != path.end();
    }

    void walk(const Scfg& graph, int vertexId, std::set<std::string> used) {
        if (used.empty()) return;
        PathConfig cfg{graph.vertices[static_cast<std::size_t>(vertexId)].point, used};
        if (on_path(cfg)) return;
        path.push_back(std::move(cfg));

        for (int predId : graph.incomingStar[static_cast<std::size_t>(vertexId)]) {
            const SymbolicState& pred = graph.vertices[static_cast<std::size_t>(predId)];
            std::set<std::string> u = used;  // independent copy per branch

            if (pred.is_entry()) {
                // Parameters still to be explained continue in the callers
                // under the call-site argument names; literal arguments end
                // their chain, and non-parameter variables have no
                // definition outside this procedure.
                std::vector<std::string> live;
                for (const std::string& p : graph.procedure->params)
                    if (u.count(p)) live.push_back(p);
                if (!live.empty()) {
                    for (const auto& [callerName, site] : callers_of(graph.procName, scfgs)) {
                        std::set<std::string> renamed;
                        for (const std::string& w : live) {
                            auto arg = try_renamed_parameter(
                                *site, parameter_index(*graph.procedure, w));
                            if (arg) renamed.insert(*arg);
                        }
                        if (!renamed.empty())
                            walk(scfgs.at(callerName), site->id, std::move(renamed));
                    }
                    for (const std::string& w : live) u.erase(w);
                }
                continue;  // the entry has an empty incoming star
            }

            bool relevant = false;
            for (const std::string& w : pred.written)
                if (u.count(w)) relevant = true;

            if (!relevant) {
                walk(graph, predId, std::move(u));
                continue;
            }

            out.push_back(&pred);
            for (const std::string& w : pred.written) u.erase(w);
            if (!u.empty() || !pred.read.empty()) {
                u.insert(pred.read.begin(), pred.read.end());
                walk(graph, predId, std::move(u));
            }
        }
        path.pop_back();
    }
};

}  // namespace

ExplanationList relevant_states(const SymbolicState& seed,
                                const miniproc::SystemOfProcedures& system,
                                const ScfgIndex& scfgs) {
    const Scfg& graph = scfgs.at(seed.point.procedure);
    Walker walker{system, scfgs, {}, {}};
    walker.out.push_back(&seed);
    walker.walk(graph, seed.id, seed.read);
    return std::move(walker.out);
}

const ExpressionPlan* InstrumentationPlan::find_expression(const std::string& text) const {
    for (const ExpressionPlan& e : perExpression)
        if (e.exprText == text) return &e;
    return nullptr;
}

InstrumentationPlan build_plan(const specs::Specification& spec,
                               const miniproc::SystemOfProcedures& system,
                               const ScfgIndex& scfgs) {
    InstrumentationPlan plan;
    for (const specs::ExpressionRef& ref : specs::expressions_of(spec)) {
        ExpressionPlan ep;
        ep.atomIndex = ref.atomIndex;
        ep.slot = ref.slot;
        ep.exprText = ref.expr->text();
        ep.vanilla = vanilla_points(spec, ref, scfgs);
        for (const ProgramPoint& point : ep.vanilla) {
            const SymbolicState* seed = scfgs.resolve(point.procedure, point.line);
            ExplanationList list = relevant_states(*seed, system, scfgs);
            ep.multiset.add(to_multiset(list));
        }
        for (const auto& [point, count] : ep.multiset.mu) plan.unionPoints.insert(point);
        plan.perExpression.push_back(std::move(ep));
    }
    // Binding states must survive filtering even when no expression reads
    // the quantified variable directly.
    for (const specs::Quantifier& q : spec.quantifiers)
        for (const ProgramPoint& point : quantifier_points(q, scfgs))
            plan.unionPoints.insert(point);
    return plan;
}

// ---------------------------------------------------------------------------
// Plan serialization

namespace {

nlohmann::json point_json(const ProgramPoint& p) {
    return nlohmann::json{{"proc", p.procedure}, {"line", p.line}};
}

ProgramPoint point_from_json(const nlohmann::json& j) {
    return ProgramPoint{j.at("proc").get<std::string>(), j.at("line").get<int>(), 0};
}

}  // namespace

std::string write_plan_json(const InstrumentationPlan& plan) {
    nlohmann::json expressions = nlohmann::json::object();
    for (const ExpressionPlan& ep : plan.perExpression) {
        nlohmann::json vanilla = nlohmann::json::array();
        for (const ProgramPoint& p : ep.vanilla) vanilla.push_back(point_json(p));
        nlohmann::json points = nlohmann::json::array();
        for (const auto& [point, count] : ep.multiset.mu) {
            nlohmann::json entry = point_json(point);
            entry["multiplicity"] = count;
            points.push_back(entry);
        }
        expressions[ep.exprText] = {{"vanilla", vanilla}, {"points", points}};
    }
    nlohmann::json unionPoints = nlohmann::json::array();
    for (const ProgramPoint& p : plan.unionPoints) unionPoints.push_back(point_json(p));
    nlohmann::json doc = {{"expressions", expressions}, {"union", unionPoints}};
    return doc.dump(2) + "\n";
}

InstrumentationPlan read_plan_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, std::string("invalid plan: ") + e.what());
    }
    InstrumentationPlan plan;
    try {
        for (const auto& [exprText, entry] : doc.at("expressions").items()) {
            ExpressionPlan ep;
            ep.atomIndex = static_cast<int>(plan.perExpression.size());
            ep.exprText = exprText;
            for (const auto& p : entry.at("vanilla")) ep.vanilla.insert(point_from_json(p));
            for (const auto& p : entry.at("points"))
                ep.multiset.mu[point_from_json(p)] = p.at("multiplicity").get<std::int64_t>();
            plan.perExpression.push_back(std::move(ep));
        }
        for (const auto& p : doc.at("union")) plan.unionPoints.insert(point_from_json(p));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, std::string("invalid plan: ") + e.what());
    }
    return plan;
}

}  // namespace icftl::instrument
