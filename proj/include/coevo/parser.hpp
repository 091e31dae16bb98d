#pragma once

#include <string>

#include "coevo/ast.hpp"

namespace coevo {

inline constexpr const char* kPatchedMarker = "// pr {:trusted}";

// parse + type check
Program parse_program(const std::string& source, const std::string& source_name = "input.mvl");
// parse only; used for units whose callees live elsewhere
Program parse_program_untyped(const std::string& source, const std::string& source_name = "input.mvl");
void typecheck(const Program& p);

Test parse_test(const std::string& source);
Test test_from_method(const Method& m);

ExprPtr parse_expr(const std::string& source);

}  // namespace coevo
