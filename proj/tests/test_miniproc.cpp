#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "icftl/errors.hpp"
#include "icftl/miniproc.hpp"
#include "icftl/testkit.hpp"

#include "helpers.hpp"

using namespace icftl;
using namespace icftl::testing;

TEST_CASE("kmg fixture parses into three procedures") {
    auto system = kmg_system();
    REQUIRE(system.procedures.size() == 3);

    const auto& k = system.at("k");
    CHECK(k.params.empty());
    CHECK(k.defLine == 1);
    CHECK(miniproc::statement_count(k) == 6);

    const auto& m = system.at("m");
    CHECK(m.params == std::vector<std::string>{"a"});

    const auto& g = system.at("g");
    CHECK(g.params == std::vector<std::string>{"b", "y"});
    CHECK(g.defLine == 11);
    CHECK(miniproc::statement_count(g) == 7);

    CHECK(miniproc::statement_count(system) == 15);
}

TEST_CASE("program points match source lines") {
    auto system = kmg_system();
    const auto& k = system.at("k");
    REQUIRE(k.body.size() == 4);
    CHECK(k.body[0].point == miniproc::ProgramPoint{"k", 2, 0});
    CHECK(k.body[1].point.line == 3);
    const auto& loop = std::get<miniproc::ForInStmt>(k.body[1].node);
    CHECK(loop.items == std::vector<std::int64_t>{0, 1});
    REQUIRE(loop.body.size() == 1);
    CHECK(loop.body[0].point.line == 4);
    CHECK(loop.endLine == 5);
    CHECK(k.body[2].point.line == 6);
    CHECK(k.body[3].point.line == 7);

    const auto& g = system.at("g");
    const auto& cond = std::get<miniproc::IfElseStmt>(g.body[1].node);
    CHECK(g.body[1].point.line == 13);
    CHECK(cond.thenBody[0].point.line == 14);
    CHECK(cond.elseLine == 15);
    REQUIRE(cond.elseBody.has_value());
    CHECK((*cond.elseBody)[0].point.line == 16);
    CHECK(cond.endLine == 17);
}

TEST_CASE("empty input yields an empty system") {
    CHECK(miniproc::parse_program("").procedures.empty());
    CHECK(miniproc::parse_program("\n   \n").procedures.empty());
}

TEST_CASE("pretty print is canonical and reparses to the same text") {
    auto system = kmg_system();
    std::string text = miniproc::pretty_print(system);
    CHECK(text.find("def g(b,y):\n") != std::string::npos);
    CHECK(text.find("    l = y + 3\n") != std::string::npos);
    CHECK(text.find("    for y in [0, 1]:\n") != std::string::npos);
    CHECK(text.find("    m(a)\n") != std::string::npos);

    auto reparsed = miniproc::parse_program(text);
    CHECK(miniproc::pretty_print(reparsed) == text);
    CHECK(miniproc::pretty_print(miniproc::SystemOfProcedures{}).empty());
}

TEST_CASE("expression printing keeps the tree shape") {
    using miniproc::BinOp;
    using miniproc::Expr;
    auto e = Expr::bin(BinOp::Mul, Expr::bin(BinOp::Add, Expr::var("a"), Expr::var("b")),
                       Expr::lit(3));
    CHECK(miniproc::print_expr(*e) == "(a + b) * 3");
    auto f = Expr::bin(BinOp::Sub, Expr::var("a"),
                       Expr::bin(BinOp::Sub, Expr::var("b"), Expr::var("c")));
    CHECK(miniproc::print_expr(*f) == "a - (b - c)");
    auto g = Expr::bin(BinOp::Lt, Expr::bin(BinOp::Add, Expr::var("a"), Expr::lit(1)),
                       Expr::lit(8));
    CHECK(miniproc::print_expr(*g) == "a + 1 < 8");
}

TEST_CASE("syntax errors carry the offending line") {
    auto expect_syntax = [](const std::string& src, int line) {
        try {
            miniproc::parse_program(src);
            FAIL("expected SyntaxError for: " << src);
        } catch (const SyntaxError& e) {
            CHECK(e.line() == line);
        }
    };
    expect_syntax("x = 1\n", 1);                                  // statement outside def
    expect_syntax("def p():\n    x = = 3\n", 2);
    expect_syntax("def p():\n    for x in []:\n    endFor\n", 2); // empty item list
    expect_syntax("def p():\n    x = 1\n    endIf\n", 3);         // stray endIf
    expect_syntax("def p():\n    for x in [1]:\n    x = 2\n", 3); // unterminated block
    expect_syntax("def p(a,a):\n    x = 1\n", 1);                 // duplicate parameter
    expect_syntax("def p():\n    x = 1\ndef p():\n    y = 2\n", 3);
    expect_syntax("def p():\n    x = 1 ? 2\n", 2);
}

TEST_CASE("link errors reject unknown callees and bad arity") {
    CHECK_THROWS_AS(miniproc::parse_program("def p():\n    q(1)\n"), LinkError);
    CHECK_THROWS_AS(miniproc::parse_program("def p():\n    q(1,2)\ndef q(a):\n    x = a\n"),
                    LinkError);
    CHECK_NOTHROW(miniproc::parse_program("def p():\n    q(1)\ndef q(a):\n    x = a\n"));
}

TEST_CASE("call arguments are names or literals only") {
    CHECK_THROWS_AS(miniproc::parse_program("def p():\n    q(a + 1)\ndef q(a):\n    x = a\n"),
                    SyntaxError);
    auto system = miniproc::parse_program("def p():\n    q(-4)\ndef q(a):\n    x = a\n");
    const auto& call = std::get<miniproc::CallStmt>(system.at("p").body[0].node);
    CHECK(std::get<std::int64_t>(call.args[0]) == -4);
}

TEST_CASE("round trip holds for 500 generated programs") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        testkit::GenConfig config;
        config.seed = seed;
        auto system = testkit::gen_program(config);
        std::string text = miniproc::pretty_print(system);
        miniproc::SystemOfProcedures reparsed;
        REQUIRE_NOTHROW(reparsed = miniproc::parse_program(text));
        REQUIRE(miniproc::pretty_print(reparsed) == text);
    }
}
