#include "doctest.h"

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/intent.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/synthesis.hpp"
#include "common.hpp"

using namespace coevo;

namespace {

const IntentFact* find_fact(const std::vector<IntentFact>& fs, int line, const std::string& text) {
    for (auto& f : fs)
        if (f.prov.line == line && print_expr(strip_ssa(f.raw)) == text) return &f;
    return nullptr;
}

}  // namespace

TEST_CASE("wf facts of the running example are hard and presence guarded") {
    Solver s;
    auto r = extract_hs_intent(parse_program(corpus("FindFirstOdd.mvl")), s);
    CHECK_FALSE(r.conforming());
    int wf = 0;
    for (auto& f : r.hard) {
        if (f.origin != FactOrigin::WfCheck || f.whole_vc) continue;
        ++wf;
        auto text = print_expr(f.formula);
        CHECK(text.rfind("presence(L", 0) == 0);
    }
    CHECK(wf >= 2);
    bool h2 = false;
    for (auto& f : r.hard)
        if (f.prov.line == 5 && f.wf_site == "FindFirstOdd/ensures/arr[i]") h2 = true;
    CHECK(h2);
    // s1 and s2 of the running example
    CHECK(find_fact(r.soft, 4, "arr[odd] % 2 != 0"));
    CHECK(find_fact(r.soft, 8, "odd == -1"));
}

TEST_CASE("conforming program has no soft intent") {
    Solver s;
    auto r = extract_hs_intent(parse_program(corpus("FindFirstOdd_repaired.mvl")), s);
    CHECK(r.conforming());
    CHECK(r.soft.empty());
    CHECK_FALSE(r.hard.empty());
    for (auto& f : r.hard) CHECK(f.whole_vc);
}

TEST_CASE("trusted facts are always hard") {
    Solver s;
    auto p = parse_program(
        "method M(x: int) returns (y: int)\n  ensures y == 2\n{\n  y := x; // {:trusted}\n  y := y + 1;\n}\n");
    auto r = extract_hs_intent(p, s);
    bool seen = false;
    for (auto& f : r.hard)
        if (f.origin == FactOrigin::Trusted) seen = true;
    CHECK(seen);
    for (auto& f : r.soft) CHECK(f.origin != FactOrigin::Trusted);
}

TEST_CASE("presence resolves by site") {
    auto e = mk_implies(mk_presence("M/ensures/a[i]", "L2"), parse_expr("0 <= i < a.Length"));
    CHECK(print_expr(resolve_presence(e, {})) == "false ==> 0 <= i < a.Length");
    CHECK(print_expr(resolve_presence(e, {"M/ensures/a[i]"})) == "true ==> 0 <= i < a.Length");
}

TEST_CASE("hard preservation catches a patch that breaks a held postcondition") {
    Solver s;
    auto before = parse_program(
        "method M(x: int) returns (y: int)\n  ensures y >= 0\n  ensures y == 5\n{\n  y := 0;\n}\n");
    auto r = extract_hs_intent(before, s);
    auto good = parse_program(
        "method M(x: int) returns (y: int)\n  ensures y >= 0\n  ensures y == 5\n{\n  y := 5;\n}\n");
    CHECK(violated_hard_facts(r, post_state(good, verify(good, s))).empty());
    auto bad = parse_program(
        "method M(x: int) returns (y: int)\n  ensures y >= 0\n  ensures y == 5\n{\n  y := -1;\n}\n");
    CHECK_FALSE(violated_hard_facts(r, post_state(bad, verify(bad, s))).empty());
    auto gone = parse_program("method M(x: int) returns (y: int)\n  ensures y == 5\n{\n  y := 5;\n}\n");
    CHECK(violated_hard_facts(r, post_state(gone, verify(gone, s))).empty());
}

TEST_CASE("explain lists every field") {
    Solver s;
    auto text = explain(extract_hs_intent(parse_program(corpus("FindFirstOdd.mvl")), s));
    for (auto key : {"origin:", "class:", "line:", "partition:", "source:", "priority:", "formula:"})
        CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("priority puts the clause at odds with the wf fact first") {
    Solver s;
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto r = extract_hs_intent(p, s);
    auto ordered = prioritize(r.soft, r.hard, s, 7);
    auto top = top_class(ordered);
    REQUIRE_FALSE(top.empty());
    CHECK(top.front().priority.h_conflicts >= 1);
    bool s2 = false;
    for (auto& f : top)
        if (f.prov.line == 4) s2 = true;
    CHECK(s2);
    auto* s1 = find_fact(ordered, 8, "odd == -1");
    REQUIRE(s1);
    CHECK(s1->priority.h_conflicts == 0);
}

TEST_CASE("priority is deterministic for a seed") {
    Solver s;
    auto r = extract_hs_intent(parse_program(corpus("FindFirstOdd.mvl")), s);
    auto a = prioritize(r.soft, r.hard, s, 3);
    auto b = prioritize(r.soft, r.hard, s, 3);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].fact_id == b[i].fact_id);
}

TEST_CASE("strength rank is antisymmetric") {
    Solver s;
    auto r = extract_hs_intent(parse_program(corpus("FindFirstOdd.mvl")), s);
    auto& soft = r.soft;
    for (size_t i = 0; i < soft.size(); ++i)
        for (size_t j = 0; j < soft.size(); ++j)
            if (i != j && stronger(soft[i], soft[j], s)) CHECK_FALSE(stronger(soft[j], soft[i], s));
}

TEST_CASE("request names the failing clause and the priority class") {
    Solver s;
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto v = verify(p, s);
    auto r = std::make_shared<IntentReport>(extract_hs_intent(v));
    auto top = top_class(prioritize(r->soft, r->hard, s, 0));
    auto req = build_request(p, "FindFirstOdd.mvl", r, v.traces.front(), top, 3);
    CHECK(req.error.find("Failing assertion `0 <= odd < arr.Length`") != std::string::npos);
    CHECK(req.error.find("ensures arr[odd] % 2 != 0") != std::string::npos);
    bool names = false;
    for (auto& line : req.priority)
        if (line.find("ensures arr[odd] % 2 != 0") != std::string::npos) names = true;
    CHECK(names);
    auto js = request_json(req);
    CHECK(js.find("\"k\":3") != std::string::npos);
    for (auto key : {"filename", "program", "error_trace", "error", "trace_assertions", "context", "priority"})
        CHECK(js.find(std::string("\"") + key + "\"") != std::string::npos);
}

TEST_CASE("annotated program marks hard nodes") {
    Solver s;
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto v = verify(p, s);
    auto r = std::make_shared<IntentReport>(extract_hs_intent(v));
    auto req = build_request(p, "FindFirstOdd.mvl", r, v.traces.front(), {}, 5);
    CHECK(req.program.find("{:trusted}") != std::string::npos);
    CHECK(req.canonical.find("{:trusted}") == std::string::npos);
    CHECK(req.priority.empty());
}
