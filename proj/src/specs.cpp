#include "icftl/specs.hpp"

#include <cctype>
#include <set>

#include "icftl/errors.hpp"

namespace icftl::specs {

std::string Expression::text() const {
    if (kind == Kind::ValueAt) return bindingVar + "(" + programVar + ")";
    return bindingVar + ".next(changes(" + programVar + ").during(" + proc + "))";
}

const char* cmp_text(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
    }
    return "?";
}

bool cmp_apply(CmpOp op, std::int64_t lhs, std::int64_t rhs) {
    switch (op) {
        case CmpOp::Lt: return lhs < rhs;
        case CmpOp::Le: return lhs <= rhs;
        case CmpOp::Gt: return lhs > rhs;
        case CmpOp::Ge: return lhs >= rhs;
        case CmpOp::Eq: return lhs == rhs;
        case CmpOp::Ne: return lhs != rhs;
    }
    return false;
}

std::string AtomicConstraint::text() const {
    std::string rhs = rhsExpr ? rhsExpr->text() : std::to_string(rhsConst);
    return lhs.text() + " " + cmp_text(op) + " " + rhs;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
    enum class Kind { Ident, Int, Sym, End };
    Kind kind = Kind::End;
    std::string text;
    std::int64_t value = 0;
};

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> toks;
    std::size_t i = 0;
    int line = 1;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            toks.push_back({Token::Kind::Ident, text.substr(i, j - i), 0});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            std::int64_t v = 0;
            try {
                v = std::stoll(text.substr(i, j - i));
            } catch (const std::out_of_range&) {
                throw SyntaxError(line, "integer constant out of range");
            }
            toks.push_back({Token::Kind::Int, "", v});
            i = j;
            continue;
        }
        auto two = text.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "==" || two == "!=") {
            toks.push_back({Token::Kind::Sym, two, 0});
            i += 2;
            continue;
        }
        static const std::string singles = ".(),:<>-";
        if (singles.find(c) != std::string::npos) {
            toks.push_back({Token::Kind::Sym, std::string(1, c), 0});
            ++i;
            continue;
        }
        throw SyntaxError(line, std::string("unexpected character '") + c + "'");
    }
    toks.push_back({Token::Kind::End, "", 0});
    return toks;
}

CmpOp mirror(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return CmpOp::Gt;
        case CmpOp::Le: return CmpOp::Ge;
        case CmpOp::Gt: return CmpOp::Lt;
        case CmpOp::Ge: return CmpOp::Le;
        default: return op;
    }
}

class SpecParser {
public:
    explicit SpecParser(const std::string& text) : toks_(lex(text)) {}

    Specification parse() {
        expect_ident("forall");
        parse_quantifier();
        while (accept_sym(",")) {
            expect_ident("forall");
            parse_quantifier();
        }
        expect_sym(":");
        spec_.body = parse_or();
        if (peek().kind != Token::Kind::End) throw SyntaxError(1, "unexpected trailing input");
        check_scope();
        return std::move(spec_);
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Specification spec_;

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    bool accept_sym(const std::string& s) {
        if (peek().kind == Token::Kind::Sym && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_sym(const std::string& s) {
        if (!accept_sym(s)) throw SyntaxError(1, "expected '" + s + "'");
    }

    bool accept_ident(const std::string& s) {
        if (peek().kind == Token::Kind::Ident && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_ident(const std::string& s) {
        if (!accept_ident(s)) throw SyntaxError(1, "expected '" + s + "'");
    }

    std::string expect_name() {
        if (peek().kind != Token::Kind::Ident) throw SyntaxError(1, "expected identifier");
        return next().text;
    }

    void parse_quantifier() {
        Quantifier q;
        q.var = expect_name();
        expect_ident("in");
        expect_ident("changes");
        expect_sym("(");
        q.changedVar = expect_name();
        expect_sym(")");
        expect_sym(".");
        expect_ident("during");
        expect_sym("(");
        q.proc = expect_name();
        expect_sym(")");
        for (const Quantifier& other : spec_.quantifiers)
            if (other.var == q.var)
                throw ScopeError("binding variable '" + q.var + "' bound twice");
        spec_.quantifiers.push_back(std::move(q));
    }

    std::unique_ptr<BoolFormula> parse_or() {
        auto f = parse_and();
        while (accept_ident("or")) {
            auto node = std::make_unique<BoolFormula>();
            node->kind = BoolFormula::Kind::Or;
            node->left = std::move(f);
            node->right = parse_and();
            f = std::move(node);
        }
        return f;
    }

    std::unique_ptr<BoolFormula> parse_and() {
        auto f = parse_not();
        while (accept_ident("and")) {
            auto node = std::make_unique<BoolFormula>();
            node->kind = BoolFormula::Kind::And;
            node->left = std::move(f);
            node->right = parse_not();
            f = std::move(node);
        }
        return f;
    }

    std::unique_ptr<BoolFormula> parse_not() {
        if (accept_ident("not")) {
            auto node = std::make_unique<BoolFormula>();
            node->kind = BoolFormula::Kind::Not;
            node->left = parse_not();
            return node;
        }
        if (accept_sym("(")) {
            auto f = parse_or();
            expect_sym(")");
            return f;
        }
        return parse_atom();
    }

    struct Operand {
        bool isConst = false;
        std::int64_t value = 0;
        Expression expr;
    };

    Operand parse_operand() {
        Operand o;
        if (accept_sym("-")) {
            if (peek().kind != Token::Kind::Int)
                throw SyntaxError(1, "expected integer after '-'");
            o.isConst = true;
            o.value = -next().value;
            return o;
        }
        if (peek().kind == Token::Kind::Int) {
            o.isConst = true;
            o.value = next().value;
            return o;
        }
        std::string name = expect_name();
        if (accept_sym("(")) {
            o.expr.kind = Expression::Kind::ValueAt;
            o.expr.bindingVar = std::move(name);
            o.expr.programVar = expect_name();
            expect_sym(")");
            return o;
        }
        expect_sym(".");
        expect_ident("next");
        expect_sym("(");
        expect_ident("changes");
        expect_sym("(");
        o.expr.kind = Expression::Kind::NextChange;
        o.expr.bindingVar = std::move(name);
        o.expr.programVar = expect_name();
        expect_sym(")");
        expect_sym(".");
        expect_ident("during");
        expect_sym("(");
        o.expr.proc = expect_name();
        expect_sym(")");
        expect_sym(")");
        return o;
    }

    CmpOp parse_cmp() {
        if (peek().kind != Token::Kind::Sym) throw SyntaxError(1, "expected comparator");
        const std::string& s = next().text;
        if (s == "<") return CmpOp::Lt;
        if (s == "<=") return CmpOp::Le;
        if (s == ">") return CmpOp::Gt;
        if (s == ">=") return CmpOp::Ge;
        if (s == "==") return CmpOp::Eq;
        if (s == "!=") return CmpOp::Ne;
        throw SyntaxError(1, "expected comparator, got '" + s + "'");
    }

    std::unique_ptr<BoolFormula> parse_atom() {
        Operand lhs = parse_operand();
        CmpOp op = parse_cmp();
        Operand rhs = parse_operand();

        AtomicConstraint atom;
        if (lhs.isConst && rhs.isConst)
            throw SyntaxError(1, "atomic constraint needs at least one expression");
        if (lhs.isConst) {
            // Normalize `c op expr` to `expr mirrored-op c`.
            atom.lhs = std::move(rhs.expr);
            atom.op = mirror(op);
            atom.rhsConst = lhs.value;
        } else {
            atom.lhs = std::move(lhs.expr);
            atom.op = op;
            if (rhs.isConst)
                atom.rhsConst = rhs.value;
            else
                atom.rhsExpr = std::move(rhs.expr);
        }
        auto node = std::make_unique<BoolFormula>();
        node->kind = BoolFormula::Kind::Atom;
        node->atomIndex = static_cast<int>(spec_.atoms.size());
        spec_.atoms.push_back(std::move(atom));
        return node;
    }

    void check_scope() const {
        std::set<std::string> bound;
        for (const Quantifier& q : spec_.quantifiers) bound.insert(q.var);
        auto check = [&](const Expression& e) {
            if (!bound.count(e.bindingVar))
                throw ScopeError("unbound binding variable '" + e.bindingVar + "'");
        };
        for (const AtomicConstraint& atom : spec_.atoms) {
            check(atom.lhs);
            if (atom.rhsExpr) check(*atom.rhsExpr);
        }
    }
};

int formula_prec(BoolFormula::Kind k) {
    switch (k) {
        case BoolFormula::Kind::Or: return 0;
        case BoolFormula::Kind::And: return 1;
        case BoolFormula::Kind::Not: return 2;
        case BoolFormula::Kind::Atom: return 3;
    }
    return 3;
}

void print_formula(const BoolFormula& f, const Specification& spec, int parentPrec,
                   std::string& out) {
    int prec = formula_prec(f.kind);
    bool parens = prec < parentPrec;
    if (parens) out += "(";
    switch (f.kind) {
        case BoolFormula::Kind::Atom:
            out += spec.atoms[static_cast<std::size_t>(f.atomIndex)].text();
            break;
        case BoolFormula::Kind::Not:
            out += "not ";
            print_formula(*f.left, spec, prec, out);
            break;
        case BoolFormula::Kind::And:
        case BoolFormula::Kind::Or:
            print_formula(*f.left, spec, prec, out);
            out += f.kind == BoolFormula::Kind::And ? " and " : " or ";
            print_formula(*f.right, spec, prec + 1, out);
            break;
    }
    if (parens) out += ")";
}

}  // namespace

Specification parse_spec(const std::string& text) { return SpecParser(text).parse(); }

std::string print_spec(const Specification& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.quantifiers.size(); ++i) {
        const Quantifier& q = spec.quantifiers[i];
        if (i) out += ", ";
        out += "forall " + q.var + " in changes(" + q.changedVar + ").during(" + q.proc + ")";
    }
    out += " : ";
    print_formula(*spec.body, spec, 0, out);
    return out;
}

std::vector<std::string> link_spec(const Specification& spec,
                                   const miniproc::SystemOfProcedures& system,
                                   const scfg::ScfgIndex& scfgs) {
    std::vector<std::string> warnings;
    for (const Quantifier& q : spec.quantifiers) {
        if (!system.find(q.proc))
            throw LinkError("quantifier over unknown procedure '" + q.proc + "'");
        const scfg::Scfg& graph = scfgs.at(q.proc);
        bool written = false;
        for (const auto& v : graph.vertices)
            if (!v.is_entry() && v.written.count(q.changedVar)) written = true;
        if (!written)
            warnings.push_back("variable '" + q.changedVar + "' is never written in '" +
                               q.proc + "'; the quantifier matches nothing");
    }
    for (const AtomicConstraint& atom : spec.atoms) {
        const Expression* exprs[2] = {&atom.lhs, atom.rhsExpr ? &*atom.rhsExpr : nullptr};
        for (const Expression* e : exprs) {
            if (!e) continue;
            if (e->kind == Expression::Kind::NextChange && !system.find(e->proc))
                throw LinkError("next-change over unknown procedure '" + e->proc + "'");
        }
    }
    return warnings;
}

std::vector<ExpressionRef> expressions_of(const Specification& spec) {
    std::vector<ExpressionRef> out;
    for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
        out.push_back({static_cast<int>(i), 0, &spec.atoms[i].lhs});
        if (spec.atoms[i].rhsExpr)
            out.push_back({static_cast<int>(i), 1, &*spec.atoms[i].rhsExpr});
    }
    return out;
}

bool eval_formula(const BoolFormula& f, const std::vector<bool>& atomValues) {
    switch (f.kind) {
        case BoolFormula::Kind::Atom:
            return atomValues[static_cast<std::size_t>(f.atomIndex)];
        case BoolFormula::Kind::Not: return !eval_formula(*f.left, atomValues);
        case BoolFormula::Kind::And:
            return eval_formula(*f.left, atomValues) && eval_formula(*f.right, atomValues);
        case BoolFormula::Kind::Or:
            return eval_formula(*f.left, atomValues) || eval_formula(*f.right, atomValues);
    }
    return false;
}

}  // namespace icftl::specs
