#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "coevo/coevolution.hpp"
#include "coevo/expr.hpp"
#include "coevo/metrics.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/vcgen.hpp"
#include "oracles.hpp"

using namespace coevo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::uint64_t kSeed = 7;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string corpus(const std::string& rel) { return std::string(CORPUS_DIR) + "/" + rel; }

struct Run {
    int status = -1;
    std::string out;
    double seconds = 0;
};

Run sh(const std::string& cmd) {
    Run r;
    auto t0 = Clock::now();
    FILE* f = popen((cmd + " 2>&1").c_str(), "r");
    if (!f) return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    int st = pclose(f);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

std::string bin() { return q(COEVO_BIN); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

std::string key_of(const std::string& text) { return normal_key(parse_expr(text)); }

std::string fmt(double s) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << s << "s";
    return os.str();
}

// every results directory of one pass over the scenarios
struct Suite {
    fs::path root;
    std::map<std::string, Run> runs;
};

fs::path tests_dir(const fs::path& work, const std::string& name, const std::vector<std::string>& files) {
    auto d = work / ("tests_" + name);
    fs::create_directories(d);
    for (auto& f : files) fs::copy_file(f, d / fs::path(f).filename(), fs::copy_options::overwrite_existing);
    return d;
}

std::vector<fs::path> seeded_cases() {
    std::vector<fs::path> out;
    for (auto& e : fs::directory_iterator(corpus("seeded"))) {
        auto name = e.path().filename().string();
        if (e.path().extension() == ".mvl" && name.find(".test.") == std::string::npos) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Suite run_suite(const fs::path& root, const fs::path& work) {
    Suite s;
    s.root = root;
    fs::remove_all(root);
    fs::create_directories(root);
    auto ffo = corpus("FindFirstOdd.mvl");
    auto seed = " --seed " + std::to_string(kSeed);
    s.runs["repair"] = sh(bin() + " repair " + q(ffo) + " --synth enumerative" + seed + " --out " +
                          q((root / "repair").string()));
    auto all_even = tests_dir(work, "all_even", {corpus("tests/AllEven.mvl")});
    auto all_even_length = tests_dir(work, "all_even_length", {corpus("tests/AllEvenLength.mvl")});
    s.runs["align_all_even"] = sh(bin() + " align " + q(ffo) + " --tests " + q(all_even.string()) +
                                  " --synth enumerative" + seed + " --out " + q((root / "align_all_even").string()));
    s.runs["align_all_even_length"] =
        sh(bin() + " align " + q(ffo) + " --tests " + q(all_even_length.string()) + " --synth enumerative" + seed +
           " --out " + q((root / "align_all_even_length").string()));
    s.runs["repair_mock"] = sh(bin() + " repair " + q(ffo) + " --synth " + q(std::string("python3 ") + MOCK_SYNTH) +
                               seed + " --out " + q((root / "repair_mock").string()));
    for (auto& c : seeded_cases()) {
        auto stem = c.stem().string();
        auto test = c.parent_path() / (stem + ".test.mvl");
        auto out = q((root / "seeded" / stem).string());
        if (fs::exists(test)) {
            auto d = tests_dir(work, "seeded_" + stem, {test.string()});
            s.runs["seeded_" + stem] = sh(bin() + " align " + q(c.string()) + " --tests " + q(d.string()) +
                                          " --synth enumerative" + seed + " --out " + out);
        } else {
            s.runs["seeded_" + stem] =
                sh(bin() + " repair " + q(c.string()) + " --synth enumerative" + seed + " --out " + out);
        }
    }
    return s;
}

Outcome verify_running_example() {
    auto src = corpus("FindFirstOdd.mvl");
    auto r = sh(bin() + " verify " + q(src));
    auto panel = expected_verify_panel(slurp(src));
    bool ok = r.status == 1 && r.out == panel + "3 errors\n" && r.seconds < 5;
    return {ok, "3 errors, panel " + std::string(r.out.rfind(panel, 0) == 0 ? "matches" : "differs") + ", " +
                    fmt(r.seconds)};
}

std::vector<Patch> read_patches(const fs::path& p) { return parse_reply(slurp(p)); }

std::string clause_text(std::string line) {
    auto m = line.find("// pr {:trusted}");
    if (m != std::string::npos) line = line.substr(0, m);
    auto e = line.find("ensures ");
    return line.substr(e + 8);
}

Outcome repair_replay(const Suite& s) {
    auto& r = s.runs.at("repair");
    auto dir = s.root / "repair" / "candidate_1";
    if (r.status != 0 || !fs::exists(dir)) return {false, "no verified candidate (" + r.out + ")"};
    auto patches = read_patches(dir / "patches.txt");
    auto expected = expected_repair_patches();
    if (patches.size() != expected.size()) return {false, std::to_string(patches.size()) + " patches"};
    for (size_t i = 0; i < expected.size(); ++i) {
        if (patches[i].hunks.size() != 1) return {false, "patch " + std::to_string(i + 1) + " has several hunks"};
        auto& h = patches[i].hunks[0];
        if (key_of(clause_text(h.original)) != key_of(expected[i].before) ||
            key_of(clause_text(h.patched)) != key_of(expected[i].after))
            return {false, "patch " + std::to_string(i + 1) + " differs: " + h.patched};
    }
    Solver solver;
    auto prog = parse_program(slurp(dir / "FindFirstOdd.mvl"));
    if (!conforms_prog_spec(prog, solver).holds) return {false, "candidate does not verify"};
    return {r.seconds < 60, "both spec patches reproduced, " + fmt(r.seconds)};
}

bool has_ensures(const Method& m, const std::string& text) {
    for (auto& c : m.ensures)
        if (normal_key(c.expr) == key_of(text)) return true;
    return false;
}

bool assigns(const Block& b, const std::string& var, const std::string& text) {
    bool found = false;
    for_each_stmt(b, [&](const Stmt& st) {
        if (auto* a = std::get_if<Assign>(&st.node))
            if (a->target == var)
                if (auto* e = std::get_if<ExprPtr>(&a->value); e && normal_key(*e) == key_of(text)) found = true;
    });
    return found;
}

Outcome align_replay(const Suite& s) {
    Solver solver;
    std::string detail;
    bool ok = true;
    for (auto name : {"align_all_even", "align_all_even_length"}) {
        auto& r = s.runs.at(name);
        auto file = s.root / name / "triple_1" / "FindFirstOdd.mvl";
        if (r.status != 0 || !fs::exists(file)) return {false, std::string(name) + " produced no triple"};
        auto prog = parse_program(slurp(file));
        auto* m = prog.find("FindFirstOdd");
        bool good = m && conforms_prog_spec(prog, solver).holds && r.seconds < 120;
        if (std::string(name) == "align_all_even") {
            good = good && has_ensures(*m, expected_all_even_clause());
        } else {
            good = good && has_ensures(*m, expected_all_even_length_clause()) &&
                   assigns(*m->body, "odd", expected_length_init());
        }
        ok = ok && good;
        detail += std::string(detail.empty() ? "" : ", ") + name + (good ? " ok " : " wrong ") + fmt(r.seconds);
    }
    return {ok, detail};
}

int path_count(const Block& b) {
    int n = 1;
    for (auto& st : b)
        if (auto* i = std::get_if<If>(&st.node))
            n *= path_count(i->then_block) + (i->else_block ? path_count(*i->else_block) : 1);
    return n;
}

Outcome partition_soundness() {
    std::mt19937_64 rng(kSeed);
    Solver solver;
    int agree = 0, total = 0, valid = 0, max_paths = 0;
    std::string first_bad;
    while (total < 120) {
        auto src = random_method(rng);
        Program p;
        try {
            p = parse_program(src);
        } catch (const std::exception& e) {
            return {false, std::string("generated method does not parse: ") + e.what() + "\n" + src};
        }
        const Method& m = p.methods.front();
        bool conforms = true;
        for (auto& part : vc_gen(p))
            if (solver.check(part.vc, part.types).status != VerdictStatus::Valid) conforms = false;
        max_paths = std::max(max_paths, path_count(*m.body));
        bool mono = wp_valid(m, -4, 4);
        ++total;
        valid += mono;
        if (mono == conforms) ++agree;
        else if (first_bad.empty()) first_bad = src;
    }
    std::string d = std::to_string(agree) + "/" + std::to_string(total) + " agree, " + std::to_string(valid) +
                    " valid, at most " + std::to_string(max_paths) + " paths";
    if (!first_bad.empty()) d += "; first disagreement:\n" + first_bad;
    return {agree == total && max_paths <= 4 && valid > 10 && valid < total - 10, d};
}

Outcome hard_preservation() {
    Solver solver, checker;
    int admitted = 0;
    std::vector<std::string> bad;
    for (auto& c : seeded_cases()) {
        auto p = parse_program(slurp(c), c.filename().string());
        auto test = c.parent_path() / (c.stem().string() + ".test.mvl");
        EnumerativePlugin plugin;
        RunOptions o;
        o.filename = c.filename().string();
        o.seed = kSeed;
        RunState st;
        if (fs::exists(test)) automated_assurance(p, {parse_test(slurp(test))}, Budget{}, plugin, solver, o, st);
        else co_evolve(p, Budget{}, plugin, solver, o, st);
        for (auto& a : st.admissions) {
            ++admitted;
            for (auto& v : hard_violations(a, checker)) bad.push_back(c.stem().string() + ": " + v);
        }
    }
    std::string d = std::to_string(admitted) + " admitted patches, " + std::to_string(bad.size()) + " violations";
    for (auto& b : bad) d += "\n  " + b;
    return {admitted > 0 && bad.empty(), d};
}

Outcome solver_oracle() {
    std::mt19937_64 rng(kSeed);
    auto types = formula_types();
    SolverConfig small, normal, large;
    small.domain = {-2, 2, 2};
    large.domain = {-5, 5, 3};
    int invalid = 0, replayed = 0, mono_checked = 0, mono_ok = 0;
    for (int i = 0; i < 500; ++i) {
        auto f = random_formula(rng, 3);
        auto v = check_validity(f, types, normal);
        if (v.status == VerdictStatus::Invalid) {
            ++invalid;
            if (v.witness && !evaluate(*f, *v.witness)) ++replayed;
        }
        auto vs = check_validity(f, types, small);
        ++mono_checked;
        if (vs.status != VerdictStatus::Invalid || v.status == VerdictStatus::Invalid) ++mono_ok;
        if (i % 5 == 0) {
            auto vl = check_validity(f, types, large);
            ++mono_checked;
            if (v.status != VerdictStatus::Invalid || vl.status == VerdictStatus::Invalid) ++mono_ok;
        }
    }
    return {replayed == invalid && mono_ok == mono_checked && invalid > 0,
            "witness replay " + std::to_string(replayed) + "/" + std::to_string(invalid) + ", monotone " +
                std::to_string(mono_ok) + "/" + std::to_string(mono_checked)};
}

Method spec_of(const std::vector<std::string>& ensures) {
    std::string src = "method FindFirstOdd(arr: array<int>) returns (odd: int)\n";
    for (auto& e : ensures) src += "  ensures " + e + "\n";
    return parse_program(src + "{\n}\n").methods.front();
}

Outcome completeness_metric() {
    Solver solver;
    auto all_even = parse_test(slurp(corpus("tests/AllEven.mvl")));
    auto all_even_length = parse_test(slurp(corpus("tests/AllEvenLength.mvl")));
    auto t = completeness(spec_of({"true"}), {all_even}, solver, 20, kSeed);
    auto e = completeness(spec_of({expected_all_even_clause()}), {all_even}, solver, 20, kSeed);
    std::mt19937_64 rng(kSeed);
    int mono = 0;
    for (int i = 0; i < 50; ++i) {
        auto phi = random_post_atom(rng), extra = random_post_atom(rng);
        auto a = completeness(spec_of({phi}), {all_even, all_even_length}, solver, 20, kSeed + i);
        auto b = completeness(spec_of({phi, extra}), {all_even, all_even_length}, solver, 20, kSeed + i);
        bool ok = b.score() >= a.score();
        for (size_t k = 0; k < a.per_mutation.size(); ++k)
            if (a.per_mutation[k].inconsistent && !b.per_mutation[k].inconsistent) ok = false;
        mono += ok;
    }
    std::ostringstream d;
    d << "true " << t.score() << " (" << t.total << " mutants), exact " << e.score() << " (" << e.total
      << " mutants), monotone " << mono << "/50";
    return {t.score() == 0.0 && t.total == 20 && e.score() == 1.0 && e.total == 20 && mono == 50, d.str()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

Outcome determinism(const Suite& a, const Suite& b) {
    auto ta = tree(a.root), tb = tree(b.root);
    std::string diff;
    for (auto& [k, v] : ta) {
        auto it = tb.find(k);
        if (it == tb.end() || it->second != v) {
            diff = k;
            break;
        }
    }
    if (diff.empty() && ta.size() != tb.size()) diff = "file sets differ";
    return {diff.empty() && !ta.empty(),
            std::to_string(ta.size()) + " files compared" + (diff.empty() ? ", identical" : ", first difference " + diff)};
}

Outcome synth_protocol(const Suite& s, const fs::path& work) {
    Solver solver;
    auto p = parse_program(slurp(corpus("FindFirstOdd.mvl")));
    auto v = verify(p, solver);
    auto report = std::make_shared<IntentReport>(extract_hs_intent(v));
    auto top = top_class(prioritize(report->soft, report->hard, solver, kSeed));
    auto req = build_request(p, "FindFirstOdd.mvl", report, v.traces.front(), top, 5);
    auto req_file = work / "request.json";
    std::ofstream(req_file) << request_json(req) << "\n";
    auto r = sh(std::string("python3 ") + q(MOCK_SYNTH) + " < " + q(req_file.string()));
    if (r.status != 0) return {false, "mock exited with " + std::to_string(r.status) + ": " + r.out};
    if (r.out.rfind("# modification 1\n", 0) != 0) return {false, "reply does not start with a modification"};
    auto patches = parse_reply(r.out);
    if (patches.size() != 1) return {false, std::to_string(patches.size()) + " patches parsed"};
    if (print_patch(patches.front()) != r.out) return {false, "round trip differs"};
    int marked = 0, lines = 0;
    auto check_marks = [&](const std::vector<Patch>& ps) {
        for (auto& pt : ps)
            for (auto& h : pt.hunks) {
                std::istringstream in(h.patched);
                std::string l;
                while (std::getline(in, l)) {
                    if (l.find_first_not_of(" \t") == std::string::npos) continue;
                    ++lines;
                    if (l.size() >= 16 && l.compare(l.size() - 16, 16, "// pr {:trusted}") == 0) ++marked;
                }
            }
    };
    check_marks(patches);
    auto& run = s.runs.at("repair_mock");
    auto lineage = s.root / "repair_mock" / "candidate_1" / "patches.txt";
    if (run.status != 0 || !fs::exists(lineage)) return {false, "repair through the mock failed: " + run.out};
    check_marks(read_patches(lineage));
    return {marked == lines && lines > 0,
            "exact round trip, " + std::to_string(marked) + "/" + std::to_string(lines) + " patched lines marked"};
}

}  // namespace

int main() {
    auto work = fs::current_path() / "acceptance_work";
    fs::remove_all(work);
    fs::create_directories(work);
    auto a = run_suite(work / "results_a", work);
    auto b = run_suite(work / "results_b", work);

    report("verify-running-example", verify_running_example());
    report("repair-replay", repair_replay(a));
    report("align-replay", align_replay(a));
    report("partition-soundness", partition_soundness());
    report("hard-intent-preservation", hard_preservation());
    report("solver-oracle", solver_oracle());
    report("completeness-metric", completeness_metric());
    report("determinism", determinism(a, b));
    report("synth-protocol", synth_protocol(a, work));
    return failures ? 1 : 0;
}
