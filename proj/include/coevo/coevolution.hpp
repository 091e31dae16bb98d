#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/intent.hpp"
#include "coevo/solver.hpp"
#include "coevo/synthesis.hpp"

namespace coevo {

enum class Relation { ProgSpec, ProgTest, SpecTest };
const char* to_string(Relation r);

struct ConformanceVerdict {
    Relation relation = Relation::ProgSpec;
    bool holds = false;
    std::vector<FailingTrace> failing_traces;
};

ConformanceVerdict conforms_prog_spec(const Program& p, Solver& solver);
// the test as a method whose spec pins the inputs and states the oracle
Method test_to_spec(const Test& t, const Method& callee);
Test spec_to_test(const Method& wrapper);
// the callee with its spec replaced by the test's
Program test_as_spec_of(const Program& p, const Test& t);
ConformanceVerdict conforms_prog_test(const Program& p, const Test& t, Solver& solver);
// signature and spec only
Method spec_to_program(const Method& m);
ConformanceVerdict conforms_spec_test(const Method& spec, const Test& t, Solver& solver);

struct Budget {
    std::chrono::milliseconds wall_clock{20 * 60 * 1000};
    int max_campaigns = 5;
    int k = 5;
    int max_candidates = 32;
};

struct Candidate {
    std::string source;
    Program program;
    // patches applied since the input, oldest first
    std::vector<Patch> lineage;
    int campaign = 0;
};

struct Admission {
    std::string parent;
    std::string child;
    Patch patch;
    std::vector<IntentFact> hard_before;
};

struct RunOptions {
    std::string filename = "input.mvl";
    bool first_only = true;
    std::uint64_t seed = 0;
    // leaves timings out of the logs
    bool deterministic = true;
    bool explain = false;
};

struct RunState {
    int campaigns = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    // json lines
    std::vector<std::string> log;
    std::vector<Admission> admissions;
    int synth_calls = 0;
};

struct CoevoResult {
    std::vector<Candidate> verified;
    bool exhausted = false;
    std::string note;
};

CoevoResult co_evolve(const Program& p, const Budget& budget, SynthPlugin& plugin, Solver& solver,
                      const RunOptions& opts, RunState& state);

struct Triple {
    Program program;
    std::vector<Test> tests;
    std::vector<Patch> lineage;
};

struct AssuranceResult {
    std::vector<Triple> triples;
    bool exhausted = false;
    std::string note;
};

AssuranceResult automated_assurance(const Program& p, const std::vector<Test>& tests, const Budget& budget,
                                    SynthPlugin& plugin, Solver& solver, const RunOptions& opts, RunState& state);

void write_repair_results(const std::string& dir, const CoevoResult& r, const RunOptions& opts, const RunState& st);
void write_align_results(const std::string& dir, const AssuranceResult& r, const RunOptions& opts,
                         const RunState& st);

}  // namespace coevo
