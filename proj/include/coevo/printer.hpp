#pragma once

#include <set>
#include <string>

#include "coevo/ast.hpp"

namespace coevo {

struct PrintOptions {
    // nodes printed as trusted in addition to their own tags
    std::set<StmtId> extra_trusted;
};

std::string print_expr(const Expr& e);
std::string print_expr(const ExprPtr& e);
std::string print_program(const Program& p, const PrintOptions& opts = {});
std::string print_method(const Method& m, const PrintOptions& opts = {});
std::string print_test(const Test& t);
Method test_as_method(const Test& t);

}  // namespace coevo
