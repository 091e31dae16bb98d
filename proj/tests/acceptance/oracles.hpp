#pragma once

#include <random>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/coevolution.hpp"
#include "coevo/solver.hpp"

// verify panel for the running example, line numbers looked up in its source
std::string expected_verify_panel(const std::string& source);

// clause text before and after each of the two repair patches
struct ClausePatch {
    std::string before;
    std::string after;
};
std::vector<ClausePatch> expected_repair_patches();
std::string expected_all_even_clause();
std::string expected_all_even_length_clause();
std::string expected_length_init();

// small loop-free methods over ints, at most four paths
std::string random_method(std::mt19937_64& rng);
// requires ==> wp(body, ensures), decided by enumerating every input in [lo, hi]
bool wp_valid(const coevo::Method& m, int lo, int hi);

coevo::ExprPtr random_formula(std::mt19937_64& rng, int depth);
coevo::VarTypes formula_types();

// admitted patches that break a hard fact of their parent, one line each
std::vector<std::string> hard_violations(const coevo::Admission& a, coevo::Solver& solver);

// random postcondition over the result and the array length
std::string random_post_atom(std::mt19937_64& rng);
