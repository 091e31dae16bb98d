#include "coevo/expr.hpp"

#include <algorithm>

#include "coevo/printer.hpp"

namespace coevo {

namespace {

template <class T>
ExprPtr make(T node, Span s) {
    auto e = std::make_shared<Expr>();
    e->node = std::move(node);
    e->span = s;
    return e;
}

}  // namespace

ExprPtr mk_int(std::int64_t v, Span s) { return make(IntLit{v}, s); }
ExprPtr mk_bool(bool v, Span s) { return make(BoolLit{v}, s); }
ExprPtr mk_null(Span s) { return make(NullLit{}, s); }
ExprPtr mk_var(const std::string& name, Span s) { return make(VarRef{name}, s); }
ExprPtr mk_array(std::vector<ExprPtr> elems, Span s) { return make(ArrayLit{std::move(elems)}, s); }
ExprPtr mk_un(UnOp op, ExprPtr e, Span s) { return make(Unary{op, std::move(e)}, s); }
ExprPtr mk_bin(BinOp op, ExprPtr l, ExprPtr r, Span s) { return make(Binary{op, std::move(l), std::move(r)}, s); }
ExprPtr mk_chain(std::vector<ExprPtr> operands, std::vector<BinOp> ops, Span s) {
    return make(Chain{std::move(operands), std::move(ops)}, s);
}
ExprPtr mk_len(ExprPtr a, Span s) { return make(Length{std::move(a)}, s); }
ExprPtr mk_index(ExprPtr a, ExprPtr i, Span s) { return make(Index{std::move(a), std::move(i)}, s); }
ExprPtr mk_quant(QuantKind k, const std::string& var, ExprPtr body, Span s) {
    return make(Quantifier{k, var, std::move(body)}, s);
}
ExprPtr mk_presence(const std::string& fingerprint, const std::string& label) {
    return make(Presence{fingerprint, label}, {});
}

ExprPtr mk_not(ExprPtr e) { return mk_un(UnOp::Not, std::move(e)); }
ExprPtr mk_and(ExprPtr a, ExprPtr b) { return mk_bin(BinOp::And, std::move(a), std::move(b)); }
ExprPtr mk_implies(ExprPtr a, ExprPtr b) { return mk_bin(BinOp::Implies, std::move(a), std::move(b)); }
ExprPtr mk_eq(ExprPtr a, ExprPtr b) { return mk_bin(BinOp::Eq, std::move(a), std::move(b)); }

ExprPtr conj(const std::vector<ExprPtr>& es) {
    if (es.empty()) return mk_bool(true);
    ExprPtr r = es[0];
    for (size_t i = 1; i < es.size(); ++i) r = mk_and(r, es[i]);
    return r;
}

ExprPtr implication_chain(const std::vector<ExprPtr>& antecedents, ExprPtr target) {
    ExprPtr r = std::move(target);
    for (auto it = antecedents.rbegin(); it != antecedents.rend(); ++it) r = mk_implies(*it, r);
    return r;
}

ExprPtr bounds_of(ExprPtr arr, ExprPtr idx) {
    return mk_chain({mk_int(0), std::move(idx), mk_len(std::move(arr))}, {BinOp::Le, BinOp::Lt});
}

bool is_bool_lit(const Expr& e, bool v) {
    auto* b = std::get_if<BoolLit>(&e.node);
    return b && b->value == v;
}

bool is_comparison(BinOp op) {
    switch (op) {
        case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
            return true;
        default:
            return false;
    }
}

void visit(const ExprPtr& e, const std::function<void(const ExprPtr&)>& f) {
    f(e);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ArrayLit>) {
                for (auto& x : n.elems) visit(x, f);
            } else if constexpr (std::is_same_v<T, Unary>) {
                visit(n.operand, f);
            } else if constexpr (std::is_same_v<T, Binary>) {
                visit(n.lhs, f);
                visit(n.rhs, f);
            } else if constexpr (std::is_same_v<T, Chain>) {
                for (auto& x : n.operands) visit(x, f);
            } else if constexpr (std::is_same_v<T, Length>) {
                visit(n.array, f);
            } else if constexpr (std::is_same_v<T, Index>) {
                visit(n.array, f);
                visit(n.index, f);
            } else if constexpr (std::is_same_v<T, Quantifier>) {
                visit(n.body, f);
            }
        },
        e->node);
}

ExprPtr rewrite(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& f) {
    if (auto r = f(e)) return r;
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ArrayLit>) {
                std::vector<ExprPtr> xs;
                for (auto& x : n.elems) xs.push_back(rewrite(x, f));
                return mk_array(std::move(xs), e->span);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return mk_un(n.op, rewrite(n.operand, f), e->span);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mk_bin(n.op, rewrite(n.lhs, f), rewrite(n.rhs, f), e->span);
            } else if constexpr (std::is_same_v<T, Chain>) {
                std::vector<ExprPtr> xs;
                for (auto& x : n.operands) xs.push_back(rewrite(x, f));
                return mk_chain(std::move(xs), n.ops, e->span);
            } else if constexpr (std::is_same_v<T, Length>) {
                return mk_len(rewrite(n.array, f), e->span);
            } else if constexpr (std::is_same_v<T, Index>) {
                return mk_index(rewrite(n.array, f), rewrite(n.index, f), e->span);
            } else if constexpr (std::is_same_v<T, Quantifier>) {
                return mk_quant(n.kind, n.var, rewrite(n.body, f), e->span);
            } else {
                return e;
            }
        },
        e->node);
}

namespace {

void free_vars_rec(const Expr& e, std::vector<std::string>& bound, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                if (std::find(bound.begin(), bound.end(), n.name) == bound.end() &&
                    std::find(out.begin(), out.end(), n.name) == out.end())
                    out.push_back(n.name);
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                for (auto& x : n.elems) free_vars_rec(*x, bound, out);
            } else if constexpr (std::is_same_v<T, Unary>) {
                free_vars_rec(*n.operand, bound, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                free_vars_rec(*n.lhs, bound, out);
                free_vars_rec(*n.rhs, bound, out);
            } else if constexpr (std::is_same_v<T, Chain>) {
                for (auto& x : n.operands) free_vars_rec(*x, bound, out);
            } else if constexpr (std::is_same_v<T, Length>) {
                free_vars_rec(*n.array, bound, out);
            } else if constexpr (std::is_same_v<T, Index>) {
                free_vars_rec(*n.array, bound, out);
                free_vars_rec(*n.index, bound, out);
            } else if constexpr (std::is_same_v<T, Quantifier>) {
                bound.push_back(n.var);
                free_vars_rec(*n.body, bound, out);
                bound.pop_back();
            }
        },
        e.node);
}

}  // namespace

void collect_free_vars(const Expr& e, std::vector<std::string>& ordered) {
    std::vector<std::string> bound;
    free_vars_rec(e, bound, ordered);
}

std::set<std::string> free_vars(const Expr& e) {
    std::vector<std::string> v;
    collect_free_vars(e, v);
    return {v.begin(), v.end()};
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub) {
    if (sub.empty()) return e;
    return rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (auto* v = std::get_if<VarRef>(&x->node)) {
            auto it = sub.find(v->name);
            return it != sub.end() ? it->second : x;
        }
        if (auto* q = std::get_if<Quantifier>(&x->node)) {
            if (sub.count(q->var)) {
                auto inner = sub;
                inner.erase(q->var);
                return mk_quant(q->kind, q->var, substitute(q->body, inner), x->span);
            }
        }
        return nullptr;
    });
}

ExprPtr rename_vars(const ExprPtr& e, const std::function<std::string(const std::string&)>& f) {
    return rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (auto* v = std::get_if<VarRef>(&x->node)) return mk_var(f(v->name), x->span);
        if (auto* q = std::get_if<Quantifier>(&x->node))
            return mk_quant(q->kind, f(q->var), rename_vars(q->body, f), x->span);
        return nullptr;
    });
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    std::function<void(const ExprPtr&)> go = [&](const ExprPtr& x) {
        if (auto* b = std::get_if<Binary>(&x->node); b && b->op == BinOp::And) {
            go(b->lhs);
            go(b->rhs);
        } else {
            out.push_back(x);
        }
    };
    go(e);
    return out;
}

std::string strip_ssa_name(const std::string& n) {
    auto p = n.find_first_of("@#");
    return p == std::string::npos ? n : n.substr(0, p);
}

ExprPtr strip_ssa(const ExprPtr& e) { return rename_vars(e, strip_ssa_name); }

namespace {

void flatten(BinOp op, const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (auto* b = std::get_if<Binary>(&e->node); b && b->op == op) {
        flatten(op, b->lhs, out);
        flatten(op, b->rhs, out);
    } else {
        out.push_back(e);
    }
}

ExprPtr sort_commutative(const ExprPtr& e) {
    return rewrite(e, [](const ExprPtr& x) -> ExprPtr {
        auto* b = std::get_if<Binary>(&x->node);
        if (!b) return nullptr;
        switch (b->op) {
            case BinOp::And: case BinOp::Or: case BinOp::Add: case BinOp::Mul: {
                std::vector<ExprPtr> parts;
                flatten(b->op, x, parts);
                std::vector<std::pair<std::string, ExprPtr>> keyed;
                for (auto& p : parts) {
                    auto s = sort_commutative(p);
                    keyed.emplace_back(print_expr(*s), s);
                }
                std::stable_sort(keyed.begin(), keyed.end(),
                                 [](auto& a, auto& c) { return a.first < c.first; });
                ExprPtr r = keyed[0].second;
                for (size_t i = 1; i < keyed.size(); ++i) r = mk_bin(b->op, r, keyed[i].second);
                return r;
            }
            case BinOp::Eq: case BinOp::Ne: case BinOp::Iff: {
                auto l = sort_commutative(b->lhs), r = sort_commutative(b->rhs);
                if (print_expr(*r) < print_expr(*l)) std::swap(l, r);
                return mk_bin(b->op, l, r);
            }
            case BinOp::Gt:
                return mk_bin(BinOp::Lt, sort_commutative(b->rhs), sort_commutative(b->lhs));
            case BinOp::Ge:
                return mk_bin(BinOp::Le, sort_commutative(b->rhs), sort_commutative(b->lhs));
            default:
                return nullptr;
        }
    });
}

}  // namespace

ExprPtr normalize(const ExprPtr& e) {
    int counter = 0;
    std::function<ExprPtr(const ExprPtr&)> alpha = [&](const ExprPtr& x) -> ExprPtr {
        return rewrite(x, [&](const ExprPtr& y) -> ExprPtr {
            if (auto* q = std::get_if<Quantifier>(&y->node)) {
                std::string fresh = "$" + std::to_string(counter++);
                auto body = substitute(q->body, {{q->var, mk_var(fresh)}});
                return mk_quant(q->kind, fresh, alpha(body));
            }
            return nullptr;
        });
    };
    return sort_commutative(alpha(e));
}

std::string normal_key(const ExprPtr& e) { return print_expr(*normalize(e)); }

void collect_accesses(const ExprPtr& e, std::vector<ExprPtr>& out, bool include_bound) {
    std::vector<std::string> bound;
    std::function<void(const ExprPtr&)> go = [&](const ExprPtr& x) {
        if (auto* q = std::get_if<Quantifier>(&x->node)) {
            bound.push_back(q->var);
            go(q->body);
            bound.pop_back();
            return;
        }
        if (std::holds_alternative<Index>(x->node)) {
            bool uses_bound = mentions_any(*x, {bound.begin(), bound.end()});
            if (include_bound || !uses_bound) out.push_back(x);
        }
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, ArrayLit>) {
                    for (auto& y : n.elems) go(y);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    go(n.operand);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    go(n.lhs);
                    go(n.rhs);
                } else if constexpr (std::is_same_v<T, Chain>) {
                    for (auto& y : n.operands) go(y);
                } else if constexpr (std::is_same_v<T, Length>) {
                    go(n.array);
                } else if constexpr (std::is_same_v<T, Index>) {
                    go(n.array);
                    go(n.index);
                }
            },
            x->node);
    };
    go(e);
}

bool mentions_any(const Expr& e, const std::set<std::string>& names) {
    if (names.empty()) return false;
    for (auto& v : free_vars(e))
        if (names.count(v)) return true;
    return false;
}

}  // namespace coevo
