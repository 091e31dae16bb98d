#include "doctest.h"

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/synthesis.hpp"
#include "common.hpp"

using namespace coevo;

namespace {

struct Fixed : SynthPlugin {
    std::vector<Patch> patches;
    std::string id() const override { return "fixed"; }
    std::vector<Patch> propose(const SynthRequest&, Solver&) override { return patches; }
};

SynthRequest request_for(const Program& p, Solver& s) {
    auto v = verify(p, s);
    auto r = std::make_shared<IntentReport>(extract_hs_intent(v));
    auto top = top_class(prioritize(r->soft, r->hard, s, 0));
    return build_request(p, "F.mvl", r, v.traces.front(), top, 5);
}

std::vector<std::string> lines_of(const std::string& t) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : t) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("enumerative plugin guards the first postcondition") {
    Solver s;
    auto p = parse_program(corpus("FindFirstOdd.mvl"));
    auto req = request_for(p, s);
    EnumerativePlugin plugin;
    auto res = synthesize(req, plugin, s);
    REQUIRE_FALSE(res.patches.empty());
    auto& h = res.patches.front().hunks;
    REQUIRE(h.size() == 1);
    CHECK(h[0].original == "  ensures arr[odd] % 2 != 0\n");
    CHECK(h[0].patched == "  ensures 0 <= odd < arr.Length ==> arr[odd] % 2 != 0 // pr {:trusted}\n");
}

TEST_CASE("hunks touching trusted lines are dropped") {
    Solver s;
    auto p = parse_program(
        "method M(x: int) returns (y: int)\n  ensures y == 2\n{\n  y := x; // {:trusted}\n  y := y + 1;\n}\n");
    auto req = request_for(p, s);
    Fixed plugin;
    plugin.patches.push_back({{{"F.mvl", "  y := x; // {:trusted}\n", "  y := 1;\n"}}, "", 0, ""});
    plugin.patches.push_back({{{"F.mvl", "  y := y + 1;\n", "  y := 2;\n"}}, "", 0, ""});
    auto res = synthesize(req, plugin, s);
    REQUIRE(res.patches.size() == 1);
    CHECK(res.patches[0].hunks[0].patched == "  y := 2; // pr {:trusted}\n");
    REQUIRE(res.dropped.size() == 1);
    CHECK(res.dropped[0].find("frozen") != std::string::npos);
}

TEST_CASE("previously patched lines are frozen") {
    Solver s;
    auto p = parse_program("method M() returns (y: int)\n  ensures y == 2\n{\n  y := 1; // pr {:trusted}\n}\n");
    auto req = request_for(p, s);
    Fixed plugin;
    plugin.patches.push_back({{{"F.mvl", "  y := 1; // pr {:trusted}\n", "  y := 2;\n"}}, "", 0, ""});
    CHECK_THROWS_AS(synthesize(req, plugin, s), NoPatches);
}

TEST_CASE("wire format round trips") {
    Patch p;
    p.hunks.push_back({"F.mvl", "  a := 1;\n", "  a := 2; // pr {:trusted}\n"});
    p.hunks.push_back({"F.mvl", "  ensures x\n", ""});
    auto text = print_patch(p);
    CHECK(text.rfind("# modification 1\n<file>F.mvl</file>\n<original>\n", 0) == 0);
    auto back = parse_hunks(text);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back[i].file == p.hunks[i].file);
        CHECK(back[i].original == p.hunks[i].original);
        CHECK(back[i].patched == p.hunks[i].patched);
    }
    auto reply = "# patch 1\n" + text + "# patch 2\n" + print_patch(p);
    CHECK(parse_reply(reply).size() == 2);
    CHECK(parse_reply(text).size() == 1);
}

TEST_CASE("second running example patch guards the forall") {
    auto src = corpus("FindFirstOdd.mvl");
    Patch p;
    p.hunks.push_back({"FindFirstOdd.mvl", "  ensures forall i :: 0 <= i < odd ==> arr[i] % 2 == 0\n",
                       "  ensures 0 <= odd < arr.Length ==> (forall i :: 0 <= i < odd ==> arr[i] % 2 == 0)\n"});
    auto out = apply_patch(src, p);
    auto lines = lines_of(out);
    REQUIRE(lines.size() > 5);
    CHECK(lines[4] ==
          "  ensures 0 <= odd < arr.Length ==> (forall i :: 0 <= i < odd ==> arr[i] % 2 == 0) // pr {:trusted}");
    auto reparsed = parse_program(out);
    CHECK(reparsed.methods[0].ensures[1].trust.patched());
}

TEST_CASE("apply patch edge cases") {
    auto src = corpus("FindFirstOdd.mvl");
    CHECK(apply_patch(src, Patch{}) == src);
    Patch twice;
    twice.hunks.push_back({"F", "  odd := -1;\n", "  odd := -2;\n"});
    twice.hunks.push_back({"F", "  odd := -1;\n", "  odd := -3;\n"});
    try {
        apply_patch(src, twice);
        FAIL("expected an error");
    } catch (const PatchError& e) {
        CHECK(e.kind == PatchErrorKind::OriginalNotFound);
    }
    Patch amb;
    amb.hunks.push_back({"F", "  x := 1;\n", "  x := 2;\n"});
    try {
        apply_patch("method M() {\n  var x := 0;\n  x := 1;\n  x := 1;\n}\n", amb);
        FAIL("expected an error");
    } catch (const PatchError& e) {
        CHECK(e.kind == PatchErrorKind::AmbiguousOriginal);
    }
    Patch broken;
    broken.hunks.push_back({"F", "  odd := -1;\n", "  odd := ;\n"});
    try {
        apply_patch(src, broken);
        FAIL("expected an error");
    } catch (const PatchError& e) {
        CHECK(e.kind == PatchErrorKind::ReparseFailure);
    }
}

TEST_CASE("diff patch marks every changed line") {
    auto before = print_program(parse_program(corpus("FindFirstOdd.mvl")));
    auto after = before;
    auto at = after.find("  odd := -1;");
    after.replace(at, 12, "  odd := 0;\n  found := false;");
    auto p = diff_patch(before, after, "F.mvl");
    REQUIRE_FALSE(p.hunks.empty());
    auto applied = apply_patch(before, p);
    auto a = lines_of(before);
    for (auto& line : lines_of(applied))
        if (std::find(a.begin(), a.end(), line) == a.end()) CHECK(line.find("// pr {:trusted}") != std::string::npos);
    CHECK(print_program(parse_program(applied)) != before);
}

TEST_CASE("wrong constant is found by the constant scan") {
    // brute force over [-4, 4]: which initial values let the strengthened example verify
    auto base = corpus("seeded/ffo_minus2.mvl");
    auto ens = std::string("  ensures (forall i :: 0 <= i < arr.Length ==> arr[i] % 2 == 0) ==> odd == -1\n");
    auto with_spec = base;
    with_spec.insert(with_spec.find("{\n"), ens);
    Solver s;
    std::vector<int> ok;
    for (int c = -4; c <= 4; ++c) {
        auto t = with_spec;
        auto cs = std::to_string(c);
        t.replace(t.find("odd := -2;"), 10, "odd := " + cs + ";");
        t.replace(t.find("odd == -2"), 9, "odd == " + cs);
        if (verify(parse_program(t), s).traces.empty()) ok.push_back(c);
    }
    REQUIRE(ok == std::vector<int>{-1});
    auto p = parse_program(with_spec);
    auto req = request_for(p, s);
    EnumerativePlugin plugin;
    auto res = synthesize(req, plugin, s);
    bool found = false;
    for (auto& patch : res.patches)
        for (auto& h : patch.hunks)
            if (h.patched.find("odd := -1; // pr {:trusted}") != std::string::npos) found = true;
    CHECK(found);
}
