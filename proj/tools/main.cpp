#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "coevo/coevolution.hpp"
#include "coevo/config.hpp"
#include "coevo/errors.hpp"
#include "coevo/metrics.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/subprocess.hpp"
#include "json.hpp"

using namespace coevo;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { Ok = 0, Nonconforming = 1, Infra = 2, RepairFailed = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Test> read_tests(const std::string& dir) {
    std::vector<Test> out;
    if (dir.empty()) return out;
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".mvl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (auto& f : files) out.push_back(parse_test(read_file(f.string())));
    return out;
}

const char* related_text(VcKind k) {
    switch (k) {
        case VcKind::Postcondition: return "This is the postcondition that might not hold.";
        case VcKind::InvariantEntry:
        case VcKind::InvariantMaintain: return "This is the loop invariant that might not hold.";
        default: return "This is the precondition that might not hold.";
    }
}

struct Common {
    std::string config;
    bool json_out = false;
};

struct RepairFlags {
    std::string file;
    std::string tests;
    std::string out = "results";
    int k = 5;
    int max_campaigns = 5;
    double time_budget = 1200;
    std::string synth;
    std::uint64_t seed = 0;
    bool all = false;
    bool first = false;
    bool explain = false;
    bool timings = false;
};

Config config_of(const Common& c) {
    Config cfg;
    if (!c.config.empty()) cfg = load_config(c.config);
    return cfg;
}

std::unique_ptr<SynthPlugin> plugin_of(const Config& cfg, const RepairFlags& f) {
    if (!f.synth.empty()) {
        if (f.synth == "enumerative") return std::make_unique<EnumerativePlugin>();
        return std::make_unique<ExternalPlugin>(f.synth, cfg.synth_timeout_ms);
    }
    return make_plugin(cfg.synth_builtin, cfg.synth_cmd, cfg.synth_timeout_ms);
}

Budget budget_of(const RepairFlags& f) {
    Budget b;
    b.k = f.k;
    b.max_campaigns = f.max_campaigns;
    b.wall_clock = std::chrono::milliseconds(static_cast<long long>(f.time_budget * 1000));
    if (b.k < 1 || b.max_campaigns < 0 || f.time_budget <= 0) throw Error("budget values must be positive");
    return b;
}

RunOptions options_of(const RepairFlags& f) {
    RunOptions o;
    o.filename = fs::path(f.file).filename().string();
    o.first_only = !f.all;
    o.seed = f.seed;
    o.deterministic = !f.timings;
    o.explain = f.explain;
    return o;
}

int cmd_verify(const Common& c, const std::string& file) {
    auto cfg = config_of(c);
    auto p = parse_program(read_file(file), file);
    Solver solver(cfg.solver);
    auto v = conforms_prog_spec(p, solver);
    if (c.json_out) {
        json j;
        j["file"] = file;
        j["conforming"] = v.holds;
        json errs = json::array();
        int n = 0;
        for (auto& t : v.failing_traces) {
            json e{{"error", ++n}, {"line", t.error_line}, {"message", t.message}, {"kind", to_string(t.kind)}};
            e["partition"] = t.partition_id;
            e["unknown"] = t.unknown;
            if (t.related_line) e["related_line"] = t.related_line;
            if (t.witness) e["witness"] = to_string(*t.witness);
            errs.push_back(e);
        }
        j["errors"] = errs;
        std::cout << j.dump(2) << "\n";
    } else {
        int n = 0;
        std::vector<std::string> related;
        for (auto& t : v.failing_traces) {
            std::cout << "line " << t.error_line << ": Error " << ++n << ": " << t.message;
            if (t.unknown) std::cout << " (unknown)";
            std::cout << "\n";
            if (t.related_line && t.related_line != t.error_line)
                related.push_back("line " + std::to_string(t.related_line) + ": " + related_text(t.kind));
        }
        for (auto& r : related) std::cout << r << "\n";
        std::cout << v.failing_traces.size() << " errors\n";
    }
    return v.holds ? Ok : Nonconforming;
}

int cmd_intent(const Common& c, const std::string& file) {
    auto cfg = config_of(c);
    auto p = parse_program(read_file(file), file);
    Solver solver(cfg.solver);
    std::cout << explain(extract_hs_intent(p, solver));
    return Ok;
}

void print_summary(const Common& c, const std::string& dir) {
    auto text = read_file((fs::path(dir) / "summary.txt").string());
    if (!c.json_out) {
        std::cout << text << "results: " << dir << "\n";
        return;
    }
    json j;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(": ");
        if (colon != std::string::npos) j[line.substr(0, colon)] = line.substr(colon + 2);
    }
    j["results"] = dir;
    std::cout << j.dump(2) << "\n";
}

int cmd_repair(const Common& c, const RepairFlags& f) {
    auto cfg = config_of(c);
    auto p = parse_program(read_file(f.file), f.file);
    Solver solver(cfg.solver);
    auto plugin = plugin_of(cfg, f);
    auto opts = options_of(f);
    RunState st;
    auto r = co_evolve(p, budget_of(f), *plugin, solver, opts, st);
    write_repair_results(f.out, r, opts, st);
    print_summary(c, f.out);
    return r.verified.empty() ? RepairFailed : Ok;
}

int cmd_align(const Common& c, const RepairFlags& f) {
    auto cfg = config_of(c);
    auto p = parse_program(read_file(f.file), f.file);
    auto tests = read_tests(f.tests);
    Solver solver(cfg.solver);
    auto plugin = plugin_of(cfg, f);
    auto opts = options_of(f);
    RunState st;
    auto r = automated_assurance(p, tests, budget_of(f), *plugin, solver, opts, st);
    write_align_results(f.out, r, opts, st);
    print_summary(c, f.out);
    return r.triples.empty() ? RepairFailed : Ok;
}

int cmd_score(const Common& c, const std::string& file, const std::string& dir, int n, std::uint64_t seed) {
    auto cfg = config_of(c);
    auto p = parse_program(read_file(file), file);
    auto tests = read_tests(dir);
    if (tests.empty()) throw Error("score needs at least one test");
    const Method* spec = p.find(tests.front().callee);
    if (!spec) throw Error("tests call unknown method " + tests.front().callee);
    Solver solver(cfg.solver);
    auto r = completeness(*spec, tests, solver, n, seed);
    const char* ops = "+1 -1 neg len zero sentinel";
    if (c.json_out) {
        json j;
        j["score"] = r.score();
        j["killed"] = r.killed;
        j["total"] = r.total;
        j["operators"] = ops;
        json rows = json::array();
        for (auto& m : r.per_mutation)
            rows.push_back(json{{"test", m.test}, {"ops", m.ops}, {"original", m.original}, {"mutated", m.mutated},
                                {"inconsistent", m.inconsistent}});
        j["per_mutation"] = rows;
        std::cout << j.dump(2) << "\n";
    } else {
        std::ostringstream sc;
        sc << r.score();
        std::cout << "score: " << sc.str() << "\n";
        std::cout << "killed: " << r.killed << "/" << r.total << "\n";
        std::cout << "operators: " << ops << " (scores compare only within this tool)\n";
        for (auto& m : r.per_mutation)
            std::cout << "  " << m.test << " " << m.original << " -> " << m.mutated << " [" << m.ops << "] "
                      << (m.inconsistent ? "killed" : "survived") << "\n";
    }
    return Ok;
}

void add_repair_flags(CLI::App* sub, RepairFlags& f) {
    sub->add_option("--k", f.k, "patches per synthesis call");
    sub->add_option("--max-campaigns", f.max_campaigns, "synthesis campaigns allowed");
    sub->add_option("--time-budget", f.time_budget, "wall clock budget in seconds");
    sub->add_option("--synth", f.synth, "enumerative, or a synthesizer command");
    sub->add_option("--seed", f.seed, "random seed");
    auto* first = sub->add_flag("--first", f.first, "stop at the first verified candidate (default)");
    sub->add_flag("--all", f.all, "keep going after a verified candidate")->excludes(first);
    sub->add_flag("--explain", f.explain, "log the intent report of every campaign");
    sub->add_flag("--timings", f.timings, "record timings in the run log");
    sub->add_option("--out", f.out, "results directory");
}

}  // namespace

int main(int argc, char** argv) {
    install_child_cleanup();
    CLI::App app{"verification-driven co-evolution of programs, specifications and tests"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config, "key=value configuration file");
    app.add_flag("--json", common.json_out, "machine-readable output");

    std::string verify_file;
    auto* verify = app.add_subcommand("verify", "check a program against its specification");
    verify->add_option("file", verify_file)->required();

    std::string intent_file;
    auto* intent = app.add_subcommand("intent", "print the hard and soft intent of a program");
    intent->add_option("file", intent_file)->required();

    RepairFlags repair_flags;
    auto* repair = app.add_subcommand("repair", "co-evolve program and specification");
    repair->add_option("file", repair_flags.file)->required();
    add_repair_flags(repair, repair_flags);

    RepairFlags align_flags;
    auto* align = app.add_subcommand("align", "align program and specification with tests");
    align->add_option("file", align_flags.file)->required();
    align->add_option("--tests", align_flags.tests, "directory of test methods");
    add_repair_flags(align, align_flags);

    std::string score_file, score_tests;
    int mutations = 20;
    std::uint64_t score_seed = 0;
    auto* score = app.add_subcommand("score", "postcondition completeness against output mutants");
    score->add_option("file", score_file)->required();
    score->add_option("--tests", score_tests, "directory of test methods")->required();
    score->add_option("--mutations", mutations, "mutants per test");
    score->add_option("--seed", score_seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Ok : Infra;
    }
    try {
        if (*verify) return cmd_verify(common, verify_file);
        if (*intent) return cmd_intent(common, intent_file);
        if (*repair) return cmd_repair(common, repair_flags);
        if (*align) return cmd_align(common, align_flags);
        if (*score) return cmd_score(common, score_file, score_tests, mutations, score_seed);
    } catch (const SpannedError& e) {
        std::cerr << "error: line " << e.span.begin.line << ": " << e.what() << "\n";
        return Infra;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Infra;
    }
    return Infra;
}
