#include "doctest.h"

#include <filesystem>

#include "coevo/coevolution.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "common.hpp"

using namespace coevo;
namespace fs = std::filesystem;

namespace {

struct Counting : SynthPlugin {
    int calls = 0;
    std::string id() const override { return "counting"; }
    std::vector<Patch> propose(const SynthRequest&, Solver&) override {
        ++calls;
        return {};
    }
};

Test test_named(const std::string& name) { return parse_test(corpus("tests/" + name + ".mvl")); }

std::map<std::string, std::string> dir_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path().string());
    return out;
}

fs::path scratch_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("coevo_unit_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("running example has three failing traces") {
    Solver s;
    auto v = conforms_prog_spec(parse_program(corpus("FindFirstOdd.mvl")), s);
    CHECK_FALSE(v.holds);
    REQUIRE(v.failing_traces.size() == 3);
    CHECK(v.failing_traces[0].error_line == 4);
    CHECK(conforms_prog_spec(parse_program(corpus("FindFirstOdd_repaired.mvl")), s).holds);
}

TEST_CASE("a method without specification conforms") {
    Solver s;
    CHECK(conforms_prog_spec(parse_program("method M(x: int) returns (y: int)\n{\n  y := x;\n}\n"), s).holds);
}

TEST_CASE("test becomes a wrapper with pinned inputs") {
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto m = test_to_spec(test_named("OddInArray"), p.methods.front());
    CHECK(print_method(m) ==
          "method {:trusted} OddInArray(x: array<int>) returns (s: int)\n"
          "  requires {:trusted} x == new int[]{2,3,4}\n"
          "  ensures {:trusted} s >= 0\n"
          "{\n"
          "  s := FindFirstOdd(x); // {:trusted}\n"
          "}\n");
    auto back = spec_to_test(m);
    CHECK(back.callee == "FindFirstOdd");
    REQUIRE(back.oracle.size() == 1);
    CHECK(print_expr(back.oracle.front().expr) == "s >= 0");
}

TEST_CASE("test with an empty oracle still translates") {
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto t = test_named("AllEven");
    t.oracle.clear();
    auto m = test_to_spec(t, p.methods.front());
    CHECK(m.ensures.empty());
    CHECK(m.requires_.size() == 1);
}

TEST_CASE("program against tests") {
    Solver s;
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    CHECK(conforms_prog_test(p, test_named("OddInArray"), s).holds);
    CHECK(conforms_prog_test(p, test_named("AllEven"), s).holds);
    CHECK_FALSE(conforms_prog_test(p, test_named("AllEvenLength"), s).holds);
}

TEST_CASE("stub keeps the signature and the spec") {
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto m = spec_to_program(p.methods.front());
    CHECK_FALSE(m.body);
    CHECK(m.ensures.size() == 2);
    CHECK(print_method(m).find("{") == print_method(m).find("{:"));
}

TEST_CASE("vacuous specification does not imply a test") {
    Solver s;
    auto m = parse_program("method FindFirstOdd(arr: array<int>) returns (odd: int)\n  ensures true\n{\n  odd := 0;\n}\n")
                 .methods.front();
    CHECK_FALSE(conforms_spec_test(spec_to_program(m), test_named("OddInArray"), s).holds);
}

TEST_CASE("complete specification implies the all-even test") {
    Solver s;
    auto m = parse_program(
                 "method FindFirstOdd(arr: array<int>) returns (odd: int)\n"
                 "  ensures (forall i :: 0 <= i < arr.Length ==> arr[i] % 2 == 0) ==> odd == -1\n"
                 "{\n  odd := -1;\n}\n")
                 .methods.front();
    // brute force: every odd the spec admits on the test input is -1
    auto ens = m.ensures.front().expr;
    int admitted = 0;
    for (std::int64_t odd = -20; odd <= 20; ++odd) {
        Env env{{"arr", std::vector<std::int64_t>{2, 2, 4}}, {"odd", odd}};
        if (!evaluate(*ens, env)) continue;
        ++admitted;
        CHECK(odd == -1);
    }
    CHECK(admitted == 1);
    CHECK(conforms_spec_test(m, test_named("AllEven"), s).holds);
    CHECK_FALSE(conforms_spec_test(m, test_named("AllEvenLength"), s).holds);
}

TEST_CASE("co_evolve repairs the running example in two campaigns") {
    Solver s;
    EnumerativePlugin plugin;
    RunState st;
    auto r = co_evolve(parse_program(corpus("FindFirstOdd.mvl")), Budget{}, plugin, s, RunOptions{}, st);
    REQUIRE(r.verified.size() == 1);
    CHECK(st.campaigns <= 2);
    CHECK(r.verified.front().lineage.size() == 2);
    CHECK(conforms_prog_spec(r.verified.front().program, s).holds);
}

TEST_CASE("conforming input needs no synthesis") {
    Solver s;
    Counting plugin;
    RunState st;
    auto r = co_evolve(parse_program(corpus("FindFirstOdd_repaired.mvl")), Budget{}, plugin, s, RunOptions{}, st);
    CHECK(r.verified.size() == 1);
    CHECK(plugin.calls == 0);
    CHECK(st.campaigns == 0);
}

TEST_CASE("zero campaigns exhausts the budget") {
    Solver s;
    EnumerativePlugin plugin;
    RunState st;
    Budget b;
    b.max_campaigns = 0;
    auto r = co_evolve(parse_program(corpus("FindFirstOdd.mvl")), b, plugin, s, RunOptions{}, st);
    CHECK(r.verified.empty());
    CHECK(r.exhausted);
}

TEST_CASE("plugin returning nothing leaves no verified candidate") {
    Solver s;
    Counting plugin;
    RunState st;
    auto r = co_evolve(parse_program(corpus("FindFirstOdd.mvl")), Budget{}, plugin, s, RunOptions{}, st);
    CHECK(r.verified.empty());
    CHECK(plugin.calls >= 1);
}

TEST_CASE("every triple conforms in all three relations") {
    Solver s;
    EnumerativePlugin plugin;
    RunState st;
    std::vector<Test> tests{test_named("OddInArray"), test_named("AllEven")};
    auto r = automated_assurance(parse_program(corpus("FindFirstOdd.mvl")), tests, Budget{}, plugin, s, RunOptions{},
                                 st);
    REQUIRE_FALSE(r.triples.empty());
    for (auto& t : r.triples) {
        auto reparsed = parse_program(print_program(t.program));
        CHECK(conforms_prog_spec(reparsed, s).holds);
        auto* m = reparsed.find("FindFirstOdd");
        REQUIRE(m);
        for (auto& test : t.tests) {
            CHECK(conforms_prog_test(reparsed, test, s).holds);
            CHECK(conforms_spec_test(*m, test, s).holds);
        }
    }
}

TEST_CASE("assurance without tests reduces to repair") {
    Solver s;
    EnumerativePlugin plugin;
    RunState st;
    auto r = automated_assurance(parse_program(corpus("FindFirstOdd.mvl")), {}, Budget{}, plugin, s, RunOptions{}, st);
    REQUIRE(r.triples.size() == 1);
    CHECK(r.triples.front().tests.empty());
}

TEST_CASE("results directory is reproducible") {
    auto run = [](const fs::path& dir) {
        Solver s;
        EnumerativePlugin plugin;
        RunState st;
        RunOptions o;
        o.filename = "FindFirstOdd.mvl";
        o.seed = 7;
        auto r = co_evolve(parse_program(corpus("FindFirstOdd.mvl")), Budget{}, plugin, s, o, st);
        write_repair_results(dir.string(), r, o, st);
    };
    auto a = scratch_dir("a"), b = scratch_dir("b");
    run(a);
    run(b);
    auto ca = dir_contents(a), cb = dir_contents(b);
    CHECK(ca.count("summary.txt"));
    CHECK(ca.count("candidate_1/FindFirstOdd.mvl"));
    CHECK(ca == cb);
    fs::remove_all(a);
    fs::remove_all(b);
}
