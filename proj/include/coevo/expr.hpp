#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coevo/ast.hpp"

namespace coevo {

ExprPtr mk_int(std::int64_t v, Span s = {});
ExprPtr mk_bool(bool v, Span s = {});
ExprPtr mk_null(Span s = {});
ExprPtr mk_var(const std::string& name, Span s = {});
ExprPtr mk_array(std::vector<ExprPtr> elems, Span s = {});
ExprPtr mk_un(UnOp op, ExprPtr e, Span s = {});
ExprPtr mk_bin(BinOp op, ExprPtr l, ExprPtr r, Span s = {});
ExprPtr mk_chain(std::vector<ExprPtr> operands, std::vector<BinOp> ops, Span s = {});
ExprPtr mk_len(ExprPtr a, Span s = {});
ExprPtr mk_index(ExprPtr a, ExprPtr i, Span s = {});
ExprPtr mk_quant(QuantKind k, const std::string& var, ExprPtr body, Span s = {});
ExprPtr mk_presence(const std::string& fingerprint, const std::string& label);

ExprPtr mk_not(ExprPtr e);
ExprPtr mk_and(ExprPtr a, ExprPtr b);
ExprPtr mk_implies(ExprPtr a, ExprPtr b);
ExprPtr mk_eq(ExprPtr a, ExprPtr b);
ExprPtr conj(const std::vector<ExprPtr>& es);
// a1 ==> (a2 ==> (... ==> target))
ExprPtr implication_chain(const std::vector<ExprPtr>& antecedents, ExprPtr target);

// 0 <= idx < arr.Length
ExprPtr bounds_of(ExprPtr arr, ExprPtr idx);

bool is_bool_lit(const Expr& e, bool v);
bool is_comparison(BinOp op);

std::set<std::string> free_vars(const Expr& e);
void collect_free_vars(const Expr& e, std::vector<std::string>& ordered);

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub);
ExprPtr rename_vars(const ExprPtr& e, const std::function<std::string(const std::string&)>& f);

// splits top-level conjunctions (&& and chains are kept whole)
std::vector<ExprPtr> conjuncts(const ExprPtr& e);

// x@3 -> x, i#2 -> i
std::string strip_ssa_name(const std::string& n);
ExprPtr strip_ssa(const ExprPtr& e);

// alpha-rename bound variables and sort commutative operands
ExprPtr normalize(const ExprPtr& e);
std::string normal_key(const ExprPtr& e);

// every a[e] sub-term, outermost first, in left-to-right order
void collect_accesses(const ExprPtr& e, std::vector<ExprPtr>& out, bool include_bound = true);
bool mentions_any(const Expr& e, const std::set<std::string>& names);

// generic top-down rewrite: f returns replacement or nullptr to recurse
ExprPtr rewrite(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& f);
void visit(const ExprPtr& e, const std::function<void(const ExprPtr&)>& f);

}  // namespace coevo
