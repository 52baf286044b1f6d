#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"
#include "icftl/scfg.hpp"
#include "icftl/specs.hpp"

namespace icftl::instrument {

using miniproc::ProgramPoint;

// A list of symbolic states explaining a seed state; duplicates mark states
// relevant through more than one dataflow path. The seed is the first entry.
using ExplanationList = std::vector<const scfg::SymbolicState*>;

// Explanation list folded into (support, multiplicity) form.
struct MultiplicityMultiset {
    std::map<ProgramPoint, std::int64_t> mu;

    std::set<ProgramPoint> support() const;
    std::int64_t total() const;
    void add(const MultiplicityMultiset& other);

    bool operator==(const MultiplicityMultiset&) const = default;
};

MultiplicityMultiset to_multiset(const ExplanationList& items);

// Non-entry states of SCFG(q.proc) whose written set contains q.changedVar:
// the states where bindings for the quantifier can be formed.
std::set<ProgramPoint> quantifier_points(const specs::Quantifier& q,
                                         const scfg::ScfgIndex& scfgs);

// Minimal instrumentation for deciding one expression: the quantifier's own
// change points for a value-at expression, the written-at points of the
// target variable for a next-change expression.
std::set<ProgramPoint> vanilla_points(const specs::Specification& spec,
                                      const specs::ExpressionRef& ref,
                                      const scfg::ScfgIndex& scfgs);

// Every (procedure, call-site state) whose statement calls `proc`,
// sorted by (procedure, line).
std::vector<std::pair<std::string, const scfg::SymbolicState*>> callers_of(
    const std::string& proc, const scfg::ScfgIndex& scfgs);

// 0-based position of `param` in the procedure's parameter list.
// Throws NotAParameter.
int parameter_index(const miniproc::Procedure& proc, const std::string& param);

// Name of the call argument at `index`; throws LiteralArgument when the
// argument is an integer literal (the chain of definitions ends there).
std::string renamed_parameter(const scfg::SymbolicState& callSite, int index);
std::optional<std::string> try_renamed_parameter(const scfg::SymbolicState& callSite,
                                                 int index);

// Backward inter-procedural dataflow walk from `seed`: collects every state
// whose written variables feed, directly or through intermediate
// definitions and parameter passing, the values read at the seed. Branch
// joins are explored per-path with independent used-variable sets, loop
// bodies are walked once, and repeated (state, used-set) configurations on
// the current path cut recursion so recursive call graphs terminate.
ExplanationList relevant_states(const scfg::SymbolicState& seed,
                                const miniproc::SystemOfProcedures& system,
                                const scfg::ScfgIndex& scfgs);

struct ExpressionPlan {
    int atomIndex = 0;
    int slot = 0;
    std::string exprText;
    std::set<ProgramPoint> vanilla;
    MultiplicityMultiset multiset;
};

// Per-expression instrumentation plus the union used to filter traces. The
// union also carries every quantifier's change points so that filtered
// traces always retain the states bindings are formed from.
struct InstrumentationPlan {
    std::vector<ExpressionPlan> perExpression;
    std::set<ProgramPoint> unionPoints;

    // Expression text is canonical, so it identifies the entry even for
    // plans loaded from JSON.
    const ExpressionPlan* find_expression(const std::string& text) const;
};

// Pure over the immutable graphs; per-expression traversals are independent
// of each other.
InstrumentationPlan build_plan(const specs::Specification& spec,
                               const miniproc::SystemOfProcedures& system,
                               const scfg::ScfgIndex& scfgs);

std::string write_plan_json(const InstrumentationPlan& plan);
InstrumentationPlan read_plan_json(const std::string& text);

}  // namespace icftl::instrument
