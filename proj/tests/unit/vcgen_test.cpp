#include "doctest.h"

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/vcgen.hpp"
#include "common.hpp"

using namespace coevo;

namespace {

std::vector<VcPartition> failing(const Program& p, Solver& s) {
    std::vector<VcPartition> out;
    for (auto& part : vc_gen(p))
        if (s.check(part.vc, part.types).status != VerdictStatus::Valid) out.push_back(part);
    return out;
}

}  // namespace

TEST_CASE("two assignments give the nested implication") {
    auto p = parse_program("method M() requires true { var x := 1; var y := 2; assert x + y >= 2; }");
    auto parts = vc_gen(p);
    REQUIRE(parts.size() == 1);
    CHECK(print_expr(parts[0].vc) == "true ==> x == 1 ==> y == 2 ==> x + y >= 2");
    auto g = passify(p.methods[0], p);
    CHECK(g.blocks.size() == 1);
    CHECK(dump(g) == "b0:\n  assume true;\n  assume x == 1;\n  assume y == 2;\n  assert x + y >= 2;\n  goto;\n");
}

TEST_CASE("empty body is a single skip") {
    auto p = parse_program("method M() { }");
    CHECK(dump(passify(p.methods[0], p)) == "b0:\n  skip;\n  goto;\n");
    CHECK(vc_gen(p).empty());
}

TEST_CASE("conjunction splits into partitions with identical paths") {
    auto p = parse_program("method M(a: bool, b: bool) { assert a && b; }");
    auto parts = vc_gen(p);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].path_ids() == parts[1].path_ids());
    CHECK(print_expr(parts[0].target.formula) == "a");
    CHECK(print_expr(parts[1].target.formula) == "b");

}

TEST_CASE("conjunction count scales with paths") {
    auto p = parse_program("method M(x: int) { var y := 0; if x > 0 { y := 1; } assert y >= 0 && y <= 1 && x == x; }");
    int n = 0;
    for (auto& part : vc_gen(p))
        if (part.kind == VcKind::IntermediateAssert) ++n;
    CHECK(n == 3 * 2);
}

TEST_CASE("FindFirstOdd reports two wf errors and one postcondition") {
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto g = passify(p.methods[0], p);
    int sinks = 0;
    for (auto& b : g.blocks)
        if (b.successors.empty()) ++sinks;
    // maintain path ends in assume false, break and exit paths reach the end
    CHECK(sinks >= 2);
    Solver s;
    auto bad = failing(p, s);
    REQUIRE(bad.size() == 3);
    CHECK(bad[0].kind == VcKind::SignatureWf);
    CHECK(bad[0].error_line == 4);
    CHECK(print_expr(bad[0].target.formula) == "0 <= odd < arr.Length");
    CHECK(bad[1].kind == VcKind::SignatureWf);
    CHECK(bad[1].error_line == 5);
    CHECK(bad[2].kind == VcKind::Postcondition);
    CHECK(bad[2].error_line == 6);
    CHECK(bad[2].related_line == 4);
    auto t = trace_of(bad[2]);
    CHECK(t.message == "A postcondition might not hold on this path.");
    CHECK(t.steps.back().line == 4);
    auto w = trace_of(bad[0]);
    CHECK(w.message == "index out of range.");
    CHECK(w.steps.back().role == NodeRole::SpecClause);
    CHECK(w.steps.back().line == 4);
}

TEST_CASE("repaired FindFirstOdd conforms") {
    auto p = parse_program(corpus("FindFirstOdd_repaired.mvl"));
    Solver s;
    CHECK(failing(p, s).empty());
}

TEST_CASE("single assert trace has length one") {
    auto p = parse_program("method M() { assert false; }");
    auto parts = vc_gen(p);
    REQUIRE(parts.size() == 1);
    CHECK(trace_of(parts[0]).steps.size() == 1);
}

TEST_CASE("vc_gen is deterministic") {
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto a = vc_gen(p), b = vc_gen(p);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].partition_id == b[i].partition_id);
        CHECK(print_expr(a[i].vc) == print_expr(b[i].vc));
        CHECK(a[i].anchor == b[i].anchor);
    }
}

TEST_CASE("path explosion is rejected") {
    std::string body;
    for (int i = 0; i < 9; ++i) body += "if x > " + std::to_string(i) + " { y := y + 1; } ";
    auto p = parse_program("method M(x: int) { var y := 0; " + body + "assert y >= 0; }");
    CHECK_THROWS_AS(vc_gen(p), PathExplosion);
}

TEST_CASE("division obligations") {
    auto p = parse_program("method M(x: int, d: int) { var y := x / d; var z := x / 2; }");
    auto parts = vc_gen(p);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].target.wf);
    CHECK(trace_of(parts[0]).message == "possible division by zero.");
}

TEST_CASE("short-circuit guards wf obligations") {
    auto p = parse_program("method M(a: array<int>, i: int) { assert 0 <= i < a.Length && a[i] > 0 || true; }");
    auto parts = vc_gen(p);
    Solver s;
    for (auto& part : parts)
        if (part.target.wf) CHECK(s.check(part.vc, part.types).status == VerdictStatus::Valid);
}

TEST_CASE("calls assert the callee precondition") {
    auto p = parse_program(
        "method Inc(x: int) returns (r: int) requires x > 0 ensures r == x + 1\n"
        "method T() { var v := Inc(0); assert v == 1; }");
    Solver s;
    auto bad = failing(p, s);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].target.call_pre);
    CHECK(trace_of(bad[0]).message == "A precondition for this call might not hold.");
}
