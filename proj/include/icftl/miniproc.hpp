#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace icftl::miniproc {

// Identifies one statement in a parsed system. `ordinal` is reserved for
// multi-statement lines and is always 0 for now.
struct ProgramPoint {
    std::string procedure;
    int line = 0;
    int ordinal = 0;

    auto operator<=>(const ProgramPoint&) const = default;
};

std::string to_string(const ProgramPoint& p);

enum class BinOp { Add, Sub, Mul, Lt, Gt, Eq };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// Expression tree: integer literals, variable references, binary operators.
// Name resolution happens at runtime only.
struct Expr {
    enum class Kind { IntLit, VarRef, Binary };

    Kind kind = Kind::IntLit;
    std::int64_t value = 0;   // IntLit
    std::string name;         // VarRef
    BinOp op = BinOp::Add;    // Binary
    ExprPtr lhs, rhs;

    static ExprPtr lit(std::int64_t v);
    static ExprPtr var(std::string n);
    static ExprPtr bin(BinOp op, ExprPtr l, ExprPtr r);
};

std::set<std::string> vars_of(const Expr& e);
std::string print_expr(const Expr& e);

struct Statement;

struct AssignStmt {
    std::string target;
    ExprPtr value;
};

// Call arguments are plain variable names or integer literals.
using CallArg = std::variant<std::string, std::int64_t>;

struct CallStmt {
    std::string callee;
    std::vector<CallArg> args;
};

struct ForInStmt {
    std::string loopVar;
    std::vector<std::int64_t> items;  // non-empty
    std::vector<Statement> body;
    int endLine = 0;  // line of the endFor keyword
};

struct IfElseStmt {
    ExprPtr cond;
    std::vector<Statement> thenBody;
    std::optional<std::vector<Statement>> elseBody;
    int elseLine = 0;  // line of the else keyword, 0 when absent
    int endLine = 0;   // line of the endIf keyword
};

struct Statement {
    ProgramPoint point;
    std::variant<AssignStmt, ForInStmt, IfElseStmt, CallStmt> node;
};

struct Procedure {
    std::string name;
    int defLine = 0;
    std::vector<std::string> params;  // pairwise distinct
    std::vector<Statement> body;
};

struct SystemOfProcedures {
    std::map<std::string, Procedure> procedures;

    const Procedure* find(const std::string& name) const;
    const Procedure& at(const std::string& name) const;  // throws LinkError
};

// Parses MiniProc source. Throws SyntaxError on malformed input and
// LinkError on unknown callees or arity mismatches; no partial systems
// escape.
SystemOfProcedures parse_program(const std::string& source);

// Canonical MiniProc text; parse_program(pretty_print(s)) reproduces the
// same AST (program points are reassigned from the canonical layout).
std::string pretty_print(const SystemOfProcedures& system);

// Number of statements in a procedure, counting loop/conditional headers,
// else lines and the endFor/endIf markers (each occupies a source line).
int statement_count(const Procedure& proc);
int statement_count(const SystemOfProcedures& system);

}  // namespace icftl::miniproc
