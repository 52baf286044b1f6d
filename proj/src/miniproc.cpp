#include "icftl/miniproc.hpp"

#include <cctype>
#include <sstream>

#include "icftl/errors.hpp"

namespace icftl::miniproc {

std::string to_string(const ProgramPoint& p) {
    return p.procedure + ":" + std::to_string(p.line) +
           (p.ordinal ? "." + std::to_string(p.ordinal) : "");
}

ExprPtr Expr::lit(std::int64_t v) {
    auto e = std::make_unique<Expr>();
    e->kind = Kind::IntLit;
    e->value = v;
    return e;
}

ExprPtr Expr::var(std::string n) {
    auto e = std::make_unique<Expr>();
    e->kind = Kind::VarRef;
    e->name = std::move(n);
    return e;
}

ExprPtr Expr::bin(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_unique<Expr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
}

static void collect_vars(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::IntLit: break;
        case Expr::Kind::VarRef: out.insert(e.name); break;
        case Expr::Kind::Binary:
            collect_vars(*e.lhs, out);
            collect_vars(*e.rhs, out);
            break;
    }
}

std::set<std::string> vars_of(const Expr& e) {
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}

const Procedure* SystemOfProcedures::find(const std::string& name) const {
    auto it = procedures.find(name);
    return it == procedures.end() ? nullptr : &it->second;
}

const Procedure& SystemOfProcedures::at(const std::string& name) const {
    const Procedure* p = find(name);
    if (!p) throw LinkError("unknown procedure '" + name + "'");
    return *p;
}

// ---------------------------------------------------------------------------
// Lexer. The language is line-oriented: one statement per line, blocks are
// closed by the explicit endFor/endIf keywords.

namespace {

struct Token {
    enum class Kind { Ident, Int, Sym, End };
    Kind kind = Kind::End;
    std::string text;       // Ident / Sym
    std::int64_t value = 0; // Int
};

bool is_keyword(const std::string& s) {
    return s == "def" || s == "for" || s == "in" || s == "if" || s == "else" ||
           s == "endIf" || s == "endFor";
}

std::vector<Token> lex_line(const std::string& text, int lineNo) {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r') {
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
                throw SyntaxError(lineNo, "integer literal out of range");
            }
            toks.push_back({Token::Kind::Int, "", v});
            i = j;
            continue;
        }
        if (c == '=' && i + 1 < text.size() && text[i + 1] == '=') {
            toks.push_back({Token::Kind::Sym, "==", 0});
            i += 2;
            continue;
        }
        static const std::string singles = "()[],:=+-*<>";
        if (singles.find(c) != std::string::npos) {
            toks.push_back({Token::Kind::Sym, std::string(1, c), 0});
            ++i;
            continue;
        }
        throw SyntaxError(lineNo, std::string("unexpected character '") + c + "'");
    }
    toks.push_back({Token::Kind::End, "", 0});
    return toks;
}

// Cursor over the tokens of one line.
struct LineCursor {
    int lineNo;
    const std::vector<Token>* toks;
    std::size_t pos = 0;

    const Token& peek() const { return (*toks)[pos]; }
    const Token& next() { return (*toks)[pos++]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    bool accept_sym(const std::string& s) {
        if (peek().kind == Token::Kind::Sym && peek().text == s) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect_sym(const std::string& s) {
        if (!accept_sym(s)) throw SyntaxError(lineNo, "expected '" + s + "'");
    }

    std::string expect_ident() {
        if (peek().kind != Token::Kind::Ident)
            throw SyntaxError(lineNo, "expected identifier");
        std::string name = next().text;
        if (is_keyword(name))
            throw SyntaxError(lineNo, "keyword '" + name + "' cannot be used as a name");
        return name;
    }

    std::int64_t expect_int() {
        bool neg = accept_sym("-");
        if (peek().kind != Token::Kind::Int)
            throw SyntaxError(lineNo, "expected integer literal");
        std::int64_t v = next().value;
        return neg ? -v : v;
    }

    void expect_end(const char* what) {
        if (!at_end())
            throw SyntaxError(lineNo, std::string("unexpected tokens after ") + what);
    }
};

// Recursive-descent expression parser: comparison over additive over
// multiplicative; a single comparison per expression.
ExprPtr parse_primary(LineCursor& c);

ExprPtr parse_term(LineCursor& c) {
    ExprPtr e = parse_primary(c);
    while (c.peek().kind == Token::Kind::Sym && c.peek().text == "*") {
        c.next();
        e = Expr::bin(BinOp::Mul, std::move(e), parse_primary(c));
    }
    return e;
}

ExprPtr parse_additive(LineCursor& c) {
    ExprPtr e = parse_term(c);
    while (c.peek().kind == Token::Kind::Sym &&
           (c.peek().text == "+" || c.peek().text == "-")) {
        BinOp op = c.next().text == "+" ? BinOp::Add : BinOp::Sub;
        e = Expr::bin(op, std::move(e), parse_term(c));
    }
    return e;
}

ExprPtr parse_expr(LineCursor& c) {
    ExprPtr e = parse_additive(c);
    if (c.peek().kind == Token::Kind::Sym) {
        const std::string& s = c.peek().text;
        if (s == "<" || s == ">" || s == "==") {
            c.next();
            BinOp op = s == "<" ? BinOp::Lt : s == ">" ? BinOp::Gt : BinOp::Eq;
            e = Expr::bin(op, std::move(e), parse_additive(c));
        }
    }
    return e;
}

ExprPtr parse_primary(LineCursor& c) {
    if (c.accept_sym("(")) {
        ExprPtr e = parse_expr(c);
        c.expect_sym(")");
        return e;
    }
    if (c.accept_sym("-")) {
        if (c.peek().kind != Token::Kind::Int)
            throw SyntaxError(c.lineNo, "expected integer after unary '-'");
        return Expr::lit(-c.next().value);
    }
    if (c.peek().kind == Token::Kind::Int) return Expr::lit(c.next().value);
    if (c.peek().kind == Token::Kind::Ident) {
        if (is_keyword(c.peek().text))
            throw SyntaxError(c.lineNo, "keyword '" + c.peek().text + "' in expression");
        return Expr::var(c.next().text);
    }
    throw SyntaxError(c.lineNo, "expected expression");
}

struct SourceLine {
    int no;
    std::vector<Token> toks;
};

// Parser over the non-blank lines of a source file.
class Parser {
public:
    explicit Parser(const std::string& source) {
        std::istringstream in(source);
        std::string text;
        int no = 0;
        while (std::getline(in, text)) {
            ++no;
            std::vector<Token> toks = lex_line(text, no);
            if (toks.size() > 1) lines_.push_back({no, std::move(toks)});
        }
    }

    SystemOfProcedures parse() {
        SystemOfProcedures system;
        while (pos_ < lines_.size()) {
            if (!starts_with_keyword("def"))
                throw SyntaxError(lines_[pos_].no, "expected 'def' at top level");
            Procedure proc = parse_procedure();
            if (system.procedures.count(proc.name))
                throw SyntaxError(proc.defLine, "procedure '" + proc.name + "' redefined");
            system.procedures.emplace(proc.name, std::move(proc));
        }
        link(system);
        return system;
    }

private:
    std::vector<SourceLine> lines_;
    std::size_t pos_ = 0;

    bool starts_with_keyword(const std::string& kw) const {
        if (pos_ >= lines_.size()) return false;
        const Token& t = lines_[pos_].toks.front();
        return t.kind == Token::Kind::Ident && t.text == kw;
    }

    LineCursor cursor() { return LineCursor{lines_[pos_].no, &lines_[pos_].toks}; }

    Procedure parse_procedure() {
        LineCursor c = cursor();
        c.next();  // def
        Procedure proc;
        proc.defLine = c.lineNo;
        proc.name = c.expect_ident();
        c.expect_sym("(");
        if (!c.accept_sym(")")) {
            for (;;) {
                std::string p = c.expect_ident();
                for (const auto& q : proc.params)
                    if (q == p)
                        throw SyntaxError(c.lineNo, "duplicate parameter '" + p + "'");
                proc.params.push_back(std::move(p));
                if (c.accept_sym(")")) break;
                c.expect_sym(",");
            }
        }
        c.expect_sym(":");
        c.expect_end("procedure header");
        ++pos_;
        proc.body = parse_block(proc.name, {});
        return proc;
    }

    // Parses statements until one of `terminators` (or a new `def` / EOF when
    // the terminator set is empty). The terminating line is not consumed.
    std::vector<Statement> parse_block(const std::string& procName,
                                       const std::set<std::string>& terminators) {
        std::vector<Statement> body;
        for (;;) {
            if (pos_ >= lines_.size()) {
                if (terminators.empty()) return body;
                throw SyntaxError(lines_.back().no, "unexpected end of input inside block");
            }
            const Token& first = lines_[pos_].toks.front();
            if (first.kind == Token::Kind::Ident) {
                if (terminators.count(first.text)) return body;
                if (first.text == "def") {
                    if (terminators.empty()) return body;
                    throw SyntaxError(lines_[pos_].no, "unexpected 'def' inside block");
                }
            }
            body.push_back(parse_statement(procName));
        }
    }

    Statement parse_statement(const std::string& procName) {
        LineCursor c = cursor();
        Statement stmt;
        stmt.point = ProgramPoint{procName, c.lineNo, 0};
        const Token& first = c.peek();
        if (first.kind != Token::Kind::Ident)
            throw SyntaxError(c.lineNo, "expected statement");

        if (first.text == "for") {
            c.next();
            ForInStmt node;
            node.loopVar = c.expect_ident();
            if (!(c.peek().kind == Token::Kind::Ident && c.peek().text == "in"))
                throw SyntaxError(c.lineNo, "expected 'in'");
            c.next();
            c.expect_sym("[");
            for (;;) {
                node.items.push_back(c.expect_int());
                if (c.accept_sym("]")) break;
                c.expect_sym(",");
            }
            c.expect_sym(":");
            c.expect_end("for header");
            ++pos_;
            node.body = parse_block(procName, {"endFor"});
            node.endLine = lines_[pos_].no;
            consume_keyword_line("endFor");
            stmt.node = std::move(node);
            return stmt;
        }

        if (first.text == "if") {
            c.next();
            IfElseStmt node;
            node.cond = parse_expr(c);
            c.expect_sym(":");
            c.expect_end("if header");
            ++pos_;
            node.thenBody = parse_block(procName, {"else", "endIf"});
            if (starts_with_keyword("else")) {
                node.elseLine = lines_[pos_].no;
                consume_keyword_line("else");
                node.elseBody = parse_block(procName, {"endIf"});
            }
            node.endLine = lines_[pos_].no;
            consume_keyword_line("endIf");
            stmt.node = std::move(node);
            return stmt;
        }

        if (is_keyword(first.text))
            throw SyntaxError(c.lineNo, "unexpected '" + first.text + "'");

        std::string name = c.next().text;
        if (c.accept_sym("=")) {
            AssignStmt node;
            node.target = std::move(name);
            node.value = parse_expr(c);
            c.expect_end("assignment");
            ++pos_;
            stmt.node = std::move(node);
            return stmt;
        }
        if (c.accept_sym("(")) {
            CallStmt node;
            node.callee = std::move(name);
            if (!c.accept_sym(")")) {
                for (;;) {
                    if (c.peek().kind == Token::Kind::Ident) {
                        std::string arg = c.expect_ident();
                        node.args.emplace_back(std::move(arg));
                    } else {
                        node.args.emplace_back(c.expect_int());
                    }
                    if (c.accept_sym(")")) break;
                    c.expect_sym(",");
                }
            }
            c.expect_end("call");
            ++pos_;
            stmt.node = std::move(node);
            return stmt;
        }
        throw SyntaxError(c.lineNo, "expected '=' or '(' after identifier");
    }

    void consume_keyword_line(const std::string& kw) {
        LineCursor c = cursor();
        c.next();  // the keyword itself, checked by the caller
        if (kw == "else") c.expect_sym(":");
        c.expect_end(("'" + kw + "'").c_str());
        ++pos_;
    }

    static void link_block(const SystemOfProcedures& system,
                           const std::vector<Statement>& body) {
        for (const Statement& s : body) {
            if (const auto* call = std::get_if<CallStmt>(&s.node)) {
                const Procedure* callee = system.find(call->callee);
                if (!callee)
                    throw LinkError("line " + std::to_string(s.point.line) +
                                    ": call to unknown procedure '" + call->callee + "'");
                if (callee->params.size() != call->args.size())
                    throw LinkError("line " + std::to_string(s.point.line) + ": call to '" +
                                    call->callee + "' with " + std::to_string(call->args.size()) +
                                    " arguments, expected " +
                                    std::to_string(callee->params.size()));
            } else if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
                link_block(system, loop->body);
            } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
                link_block(system, cond->thenBody);
                if (cond->elseBody) link_block(system, *cond->elseBody);
            }
        }
    }

    static void link(const SystemOfProcedures& system) {
        for (const auto& [name, proc] : system.procedures) link_block(system, proc.body);
    }
};

}  // namespace

SystemOfProcedures parse_program(const std::string& source) {
    return Parser(source).parse();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(BinOp op) {
    switch (op) {
        case BinOp::Lt:
        case BinOp::Gt:
        case BinOp::Eq: return 0;
        case BinOp::Add:
        case BinOp::Sub: return 1;
        case BinOp::Mul: return 2;
    }
    return 0;
}

const char* op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Lt: return "<";
        case BinOp::Gt: return ">";
        case BinOp::Eq: return "==";
    }
    return "?";
}

void print_expr_prec(const Expr& e, int parentPrec, bool rightChild, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::IntLit: out += std::to_string(e.value); return;
        case Expr::Kind::VarRef: out += e.name; return;
        case Expr::Kind::Binary: break;
    }
    int prec = precedence(e.op);
    // +, -, * are left-associative and comparisons are non-associative; a
    // right child of equal precedence (or a nested comparison) needs
    // parentheses to reparse into the same tree.
    bool parens = prec < parentPrec || (prec == parentPrec && (rightChild || prec == 0));
    if (parens) out += "(";
    print_expr_prec(*e.lhs, prec, false, out);
    out += " ";
    out += op_text(e.op);
    out += " ";
    print_expr_prec(*e.rhs, prec, true, out);
    if (parens) out += ")";
}

void print_block(const std::vector<Statement>& body, int indent, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
    for (const Statement& s : body) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            out += pad + a->target + " = ";
            print_expr_prec(*a->value, -1, false, out);
            out += "\n";
        } else if (const auto* call = std::get_if<CallStmt>(&s.node)) {
            out += pad + call->callee + "(";
            for (std::size_t i = 0; i < call->args.size(); ++i) {
                if (i) out += ",";
                if (const auto* n = std::get_if<std::string>(&call->args[i]))
                    out += *n;
                else
                    out += std::to_string(std::get<std::int64_t>(call->args[i]));
            }
            out += ")\n";
        } else if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            out += pad + "for " + loop->loopVar + " in [";
            for (std::size_t i = 0; i < loop->items.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(loop->items[i]);
            }
            out += "]:\n";
            print_block(loop->body, indent + 1, out);
            out += pad + "endFor\n";
        } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
            out += pad + "if ";
            print_expr_prec(*cond->cond, -1, false, out);
            out += ":\n";
            print_block(cond->thenBody, indent + 1, out);
            if (cond->elseBody) {
                out += pad + "else:\n";
                print_block(*cond->elseBody, indent + 1, out);
            }
            out += pad + "endIf\n";
        }
    }
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    print_expr_prec(e, -1, false, out);
    return out;
}

std::string pretty_print(const SystemOfProcedures& system) {
    std::string out;
    for (const auto& [name, proc] : system.procedures) {
        out += "def " + name + "(";
        for (std::size_t i = 0; i < proc.params.size(); ++i) {
            if (i) out += ",";
            out += proc.params[i];
        }
        out += "):\n";
        print_block(proc.body, 1, out);
    }
    return out;
}

static int count_block(const std::vector<Statement>& body) {
    int n = 0;
    for (const Statement& s : body) {
        ++n;  // the statement's own line (header line for blocks)
        if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            n += count_block(loop->body) + 1;  // + endFor
        } else if (const auto* cond = std::get_if<IfElseStmt>(&s.node)) {
            n += count_block(cond->thenBody) + 1;  // + endIf
            if (cond->elseBody) n += count_block(*cond->elseBody) + 1;  // + else line
        }
    }
    return n;
}

int statement_count(const Procedure& proc) { return count_block(proc.body); }

int statement_count(const SystemOfProcedures& system) {
    int n = 0;
    for (const auto& [name, proc] : system.procedures) n += statement_count(proc);
    return n;
}

}  // namespace icftl::miniproc
