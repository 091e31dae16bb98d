#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/solver.hpp"

namespace coevo {

struct MutationOutcome {
    std::string test;
    // operators applied, in order
    std::string ops;
    std::int64_t original = 0;
    std::int64_t mutated = 0;
    bool inconsistent = false;
};

struct CompletenessResult {
    int killed = 0;
    int total = 0;
    std::vector<MutationOutcome> per_mutation;
    double score() const { return total ? static_cast<double>(killed) / total : 0.0; }
};

// value the oracle pins the result to, evaluated on the test inputs
std::int64_t pinned_output(const Test& t);

// seeded output mutants of a test, distinct and different from the pinned value
std::vector<MutationOutcome> output_mutants(const Test& t, int n, std::uint64_t seed);

CompletenessResult completeness(const Method& spec, const std::vector<Test>& tests, Solver& solver, int n = 20,
                                std::uint64_t seed = 0);

std::string summary_prompt_template();
std::string build_summary_prompt(const std::string& annotated_program);
// annotates the hard intent of p before filling the template
std::string build_summary_prompt(const Program& p, Solver& solver);

}  // namespace coevo
