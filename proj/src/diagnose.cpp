#include "icftl/diagnose.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

#include "icftl/errors.hpp"

namespace icftl::diagnose {

using instrument::InstrumentationPlan;
using miniproc::ProgramPoint;
using monitor::BindingVerdict;
using runtime::IotaTrace;
using specs::Specification;

std::set<int> falsifying_atoms(const BindingVerdict& verdict, const Specification& spec) {
    if (verdict.value)
        throw InvariantViolation("falsifying_atoms called on a satisfied binding");

    std::vector<int> falseAtoms;
    std::vector<bool> actual;
    for (std::size_t i = 0; i < verdict.atoms.size(); ++i) {
        actual.push_back(verdict.atoms[i].value);
        if (!verdict.atoms[i].value) falseAtoms.push_back(static_cast<int>(i));
    }

    // An atom is to blame if, in some counterfactual where other false atoms
    // are flipped to true, flipping this one turns the body true.
    std::set<int> out;
    std::size_t n = falseAtoms.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<bool> values = actual;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i))
                values[static_cast<std::size_t>(falseAtoms[i])] = true;
        if (specs::eval_formula(*spec.body, values)) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) continue;
            values[static_cast<std::size_t>(falseAtoms[i])] = true;
            if (specs::eval_formula(*spec.body, values)) out.insert(falseAtoms[i]);
            values[static_cast<std::size_t>(falseAtoms[i])] = false;
        }
    }
    return out;
}

Diagnosis build_diagnosis(const Specification& spec, const IotaTrace& trace,
                          const InstrumentationPlan& plan, const scfg::ScfgIndex& scfgs) {
    monitor::VerdictMap verdicts = monitor::check(trace, spec, scfgs);
    std::vector<specs::ExpressionRef> exprs = specs::expressions_of(spec);

    // The slice of an expression does not depend on the binding; build each
    // once and share it.
    std::map<std::string, std::shared_ptr<const AnnotatedFSlice>> cache;
    auto slice_for = [&](const std::string& text) {
        auto it = cache.find(text);
        if (it != cache.end()) return it->second;
        const instrument::ExpressionPlan* ep = plan.find_expression(text);
        if (!ep)
            throw InvariantViolation("plan has no entry for expression '" + text + "'");
        auto annotated = std::make_shared<AnnotatedFSlice>();
        annotated->slice = runtime::filter_trace(trace, ep->multiset.support());
        for (std::size_t r = 0; r < annotated->slice.trace.runs.size(); ++r) {
            std::vector<std::int64_t> mult;
            for (const runtime::TraceEvent& e : annotated->slice.trace.runs[r].events) {
                ProgramPoint p{annotated->slice.trace.labels[r], *e.line, 0};
                mult.push_back(ep->multiset.mu.at(p));
            }
            annotated->multiplicity.push_back(std::move(mult));
        }
        cache.emplace(text, annotated);
        return cache.at(text);
    };

    Diagnosis diag;
    for (const BindingVerdict& verdict : verdicts.entries) {
        if (verdict.value) continue;
        for (int atom : falsifying_atoms(verdict, spec)) {
            for (const specs::ExpressionRef& ref : exprs) {
                if (ref.atomIndex != atom) continue;
                DiagnosisEntry entry;
                entry.binding = verdict.binding;
                entry.atomIndex = ref.atomIndex;
                entry.slot = ref.slot;
                entry.expressionText = ref.expr->text();
                entry.slice = slice_for(entry.expressionText);
                diag.entries.push_back(std::move(entry));
            }
        }
    }
    return diag;
}

std::set<ProgramPoint> diagnosis_points(const Diagnosis& diag, const InstrumentationPlan& plan,
                                        bool executedOnly) {
    std::set<ProgramPoint> out;
    if (executedOnly) {
        for (const DiagnosisEntry& entry : diag.entries) {
            const IotaTrace& t = entry.slice->slice.trace;
            for (std::size_t r = 0; r < t.runs.size(); ++r)
                for (const runtime::TraceEvent& e : t.runs[r].events)
                    out.insert(ProgramPoint{t.labels[r], *e.line, 0});
        }
        return out;
    }
    std::set<std::string> seen;
    for (const DiagnosisEntry& entry : diag.entries) {
        if (!seen.insert(entry.expressionText).second) continue;
        const instrument::ExpressionPlan* ep = plan.find_expression(entry.expressionText);
        if (!ep) continue;
        for (const auto& [point, count] : ep->multiset.mu) out.insert(point);
    }
    return out;
}

std::string write_diagnosis_json(const Diagnosis& diag, const IotaTrace& trace,
                                 const Specification& spec) {
    nlohmann::json out = nlohmann::json::array();
    for (const DiagnosisEntry& entry : diag.entries) {
        nlohmann::json binding = nlohmann::json::object();
        for (std::size_t q = 0; q < spec.quantifiers.size(); ++q) {
            const runtime::TraceEvent& e = entry.binding.event(trace, q);
            binding[spec.quantifiers[q].var] = {
                {"proc", trace.labels[entry.binding.states[q].run]},
                {"line", e.line ? nlohmann::json(*e.line) : nlohmann::json()},
                {"t", e.t.str()}};
        }
        // Slice entries flattened and sorted by timestamp.
        struct Row {
            runtime::Timestamp t;
            nlohmann::json obj;
        };
        std::vector<Row> rows;
        const IotaTrace& st = entry.slice->slice.trace;
        for (std::size_t r = 0; r < st.runs.size(); ++r) {
            for (std::size_t i = 0; i < st.runs[r].events.size(); ++i) {
                const runtime::TraceEvent& e = st.runs[r].events[i];
                nlohmann::json values = nlohmann::json::object();
                for (const auto& [k, v] : e.values) values[k] = v;
                rows.push_back({e.t,
                                {{"proc", st.labels[r]},
                                 {"line", *e.line},
                                 {"t", e.t.str()},
                                 {"values", values},
                                 {"multiplicity", entry.slice->multiplicity[r][i]}}});
            }
        }
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.t < b.t; });
        nlohmann::json slice = nlohmann::json::array();
        for (Row& row : rows) slice.push_back(std::move(row.obj));
        out.push_back({{"binding", binding},
                       {"expression", entry.expressionText},
                       {"slice", slice}});
    }
    return out.dump(2) + "\n";
}

}  // namespace icftl::diagnose
