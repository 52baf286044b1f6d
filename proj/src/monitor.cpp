#include "icftl/monitor.hpp"

#include <algorithm>

#include "icftl/errors.hpp"

namespace icftl::monitor {

using runtime::IotaTrace;
using runtime::Timestamp;
using runtime::TraceEvent;
using specs::Expression;
using specs::Specification;

bool VerdictMap::all_satisfied() const {
    for (const BindingVerdict& e : entries)
        if (!e.value) return false;
    return true;
}

TraceIndex TraceIndex::build(const IotaTrace& trace, const scfg::ScfgIndex& scfgs) {
    TraceIndex index;
    for (std::size_t r = 0; r < trace.runs.size(); ++r) {
        const std::string& proc = trace.labels[r];
        for (const TraceEvent& e : trace.runs[r].events) {
            if (!e.line) continue;
            const scfg::SymbolicState* state = scfgs.resolve(proc, *e.line);
            if (!state)
                throw MissingValue("trace event at " + proc + ":" + std::to_string(*e.line) +
                                   " matches no statement");
            for (const std::string& var : state->written) {
                auto it = e.values.find(var);
                if (it == e.values.end()) continue;  // unwritten on this visit
                index.writes_[{proc, var}].emplace_back(e.t, it->second);
            }
        }
    }
    for (auto& [key, events] : index.writes_)
        std::sort(events.begin(), events.end());
    return index;
}

EvalResult TraceIndex::next_change(const std::string& proc, const std::string& var,
                                   Timestamp after) const {
    auto it = writes_.find({proc, var});
    if (it == writes_.end()) return {};
    const auto& events = it->second;
    auto pos = std::upper_bound(events.begin(), events.end(), after,
                                [](Timestamp t, const auto& e) { return t < e.first; });
    if (pos == events.end()) return {};
    return {true, pos->second};
}

std::vector<Binding> enumerate_bindings(const IotaTrace& trace, const Specification& spec,
                                        const scfg::ScfgIndex& scfgs) {
    // Matching states per quantifier, in global trace order.
    std::vector<std::vector<BoundState>> candidates(spec.quantifiers.size());
    for (std::size_t q = 0; q < spec.quantifiers.size(); ++q) {
        const specs::Quantifier& quant = spec.quantifiers[q];
        std::vector<std::pair<Timestamp, BoundState>> matches;
        for (std::size_t r = 0; r < trace.runs.size(); ++r) {
            if (trace.labels[r] != quant.proc) continue;
            for (std::size_t i = 0; i < trace.runs[r].events.size(); ++i) {
                const TraceEvent& e = trace.runs[r].events[i];
                if (!e.line) continue;
                const scfg::SymbolicState* state = scfgs.resolve(quant.proc, *e.line);
                if (!state)
                    throw MissingValue("trace event at " + quant.proc + ":" +
                                       std::to_string(*e.line) + " matches no statement");
                if (state->written.count(quant.changedVar))
                    matches.emplace_back(e.t, BoundState{r, i});
            }
        }
        std::sort(matches.begin(), matches.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [t, state] : matches) candidates[q].push_back(state);
    }

    std::vector<Binding> bindings;
    Binding current;
    current.states.resize(spec.quantifiers.size());
    // Cross product with the first quantifier outermost.
    auto expand = [&](auto&& self, std::size_t q) -> void {
        if (q == candidates.size()) {
            bindings.push_back(current);
            return;
        }
        for (const BoundState& state : candidates[q]) {
            current.states[q] = state;
            self(self, q + 1);
        }
    };
    expand(expand, 0);
    return bindings;
}

EvalResult eval_expression(const IotaTrace& trace, const Specification& spec,
                           const Binding& binding, const Expression& expr,
                           const TraceIndex& index) {
    std::size_t q = 0;
    while (q < spec.quantifiers.size() && spec.quantifiers[q].var != expr.bindingVar) ++q;
    if (q == spec.quantifiers.size())
        throw InvariantViolation("expression '" + expr.text() + "' has no quantifier");
    const TraceEvent& bound = binding.event(trace, q);

    if (expr.kind == Expression::Kind::ValueAt) {
        auto it = bound.values.find(expr.programVar);
        if (it == bound.values.end())
            throw MissingValue("bound state at t=" + bound.t.str() + " carries no value for '" +
                               expr.programVar + "'");
        return {true, it->second};
    }
    return index.next_change(expr.proc, expr.programVar, bound.t);
}

VerdictMap check(const IotaTrace& trace, const Specification& spec,
                 const scfg::ScfgIndex& scfgs) {
    TraceIndex index = TraceIndex::build(trace, scfgs);
    VerdictMap verdicts;
    for (Binding& binding : enumerate_bindings(trace, spec, scfgs)) {
        BindingVerdict entry;
        entry.binding = std::move(binding);
        std::vector<bool> atomValues;
        for (const specs::AtomicConstraint& atom : spec.atoms) {
            EvalResult lhs = eval_expression(trace, spec, entry.binding, atom.lhs, index);
            EvalResult rhs{true, atom.rhsConst};
            if (atom.rhsExpr)
                rhs = eval_expression(trace, spec, entry.binding, *atom.rhsExpr, index);
            AtomOutcome outcome;
            if (lhs.resolved && rhs.resolved) {
                outcome.resolved = true;
                outcome.value = specs::cmp_apply(atom.op, lhs.value, rhs.value);
            }
            // An unresolved side leaves the atom false: a constrained change
            // that never happens cannot be shown satisfied.
            atomValues.push_back(outcome.value);
            entry.atoms.push_back(outcome);
        }
        entry.value = specs::eval_formula(*spec.body, atomValues);
        verdicts.entries.push_back(std::move(entry));
    }
    return verdicts;
}

std::string binding_signature(const IotaTrace& trace, const Specification& spec,
                              const Binding& binding) {
    std::string out;
    for (std::size_t q = 0; q < spec.quantifiers.size(); ++q) {
        const TraceEvent& e = binding.event(trace, q);
        if (q) out += " ";
        out += spec.quantifiers[q].var + "=" + trace.labels[binding.states[q].run] + ":" +
               (e.line ? std::to_string(*e.line) : "entry") + "@" + e.t.str();
    }
    return out;
}

}  // namespace icftl::monitor
