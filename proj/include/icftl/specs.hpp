#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"
#include "icftl/scfg.hpp"

namespace icftl::specs {

// `forall <var> in changes(<changedVar>).during(<proc>)`
struct Quantifier {
    std::string var;
    std::string changedVar;
    std::string proc;

    bool operator==(const Quantifier&) const = default;
};

// Value extraction from a bound concrete state: either the value of a
// program variable at the bound state, or the value of the next change of
// a variable in some procedure after it.
struct Expression {
    enum class Kind { ValueAt, NextChange };

    Kind kind = Kind::ValueAt;
    std::string bindingVar;
    std::string programVar;
    std::string proc;  // NextChange only

    std::string text() const;
    bool operator==(const Expression&) const = default;
};

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

const char* cmp_text(CmpOp op);
bool cmp_apply(CmpOp op, std::int64_t lhs, std::int64_t rhs);

struct AtomicConstraint {
    Expression lhs;
    CmpOp op = CmpOp::Lt;
    std::optional<Expression> rhsExpr;  // when absent, rhs is the constant
    std::int64_t rhsConst = 0;

    std::string text() const;
};

// Body formula over atom indices (into Specification::atoms).
struct BoolFormula {
    enum class Kind { Atom, And, Or, Not };

    Kind kind = Kind::Atom;
    int atomIndex = -1;
    std::unique_ptr<BoolFormula> left, right;  // Not uses left only
};

// Prenex-quantified constraint; no free variables.
struct Specification {
    std::vector<Quantifier> quantifiers;
    std::vector<AtomicConstraint> atoms;  // in source order
    std::unique_ptr<BoolFormula> body;
};

// Throws SyntaxError / ScopeError. Procedure names are validated separately
// by link_spec, once a system is available.
Specification parse_spec(const std::string& text);

std::string print_spec(const Specification& spec);

// Checks quantifier and next-change procedures against the system; returns
// warnings for quantified variables never written in their procedure.
std::vector<std::string> link_spec(const Specification& spec,
                                   const miniproc::SystemOfProcedures& system,
                                   const scfg::ScfgIndex& scfgs);

struct ExpressionRef {
    int atomIndex = 0;
    int slot = 0;  // 0 = lhs, 1 = rhs
    const Expression* expr = nullptr;
};

// Every expression with its enclosing atom, in source order.
std::vector<ExpressionRef> expressions_of(const Specification& spec);

bool eval_formula(const BoolFormula& f, const std::vector<bool>& atomValues);

}  // namespace icftl::specs
