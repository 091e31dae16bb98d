#include "coevo/solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/printer.hpp"
#include "coevo/quant.hpp"

namespace coevo {

std::string to_string(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    auto& a = std::get<std::vector<std::int64_t>>(v);
    std::string r = "[";
    for (size_t k = 0; k < a.size(); ++k) {
        if (k) r += ",";
        r += std::to_string(a[k]);
    }
    return r + "]";
}

std::string to_string(const Env& env) {
    std::string r;
    for (auto& [k, v] : env) {
        if (!r.empty()) r += ", ";
        r += k + "=" + to_string(v);
    }
    return r;
}

const char* to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Valid: return "valid";
        case VerdictStatus::Invalid: return "invalid";
        case VerdictStatus::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(Backend b) { return b == Backend::Bounded ? "bounded" : "smt"; }

namespace {

using Arr = std::vector<std::int64_t>;

struct Val {
    enum Kind : std::uint8_t { Unset, Int, Bool, Array, Null } k = Unset;
    std::int64_t i = 0;
    const Arr* a = nullptr;
};

struct BudgetExceeded {};

enum class Op { Const, Var, Not, Neg, Bin, Chain, Len, Idx, Quant, ArrLit };

struct Node {
    Op op;
    Val constant;
    int slot = -1;
    BinOp bop = BinOp::Add;
    QuantKind qk = QuantKind::Forall;
    std::vector<int> kids;
    std::vector<BinOp> ops;
    Span span;
    std::shared_ptr<Arr> scratch;
};

class Program_ {
public:
    std::vector<Node> nodes;
    std::vector<std::string> slot_names;
    std::map<std::string, int> slots;
    std::vector<Val> env;
    std::uint64_t evals = 0;
    std::uint64_t max_evals = ~0ull;

    int slot(const std::string& n) {
        auto it = slots.find(n);
        if (it != slots.end()) return it->second;
        int s = static_cast<int>(slot_names.size());
        slots[n] = s;
        slot_names.push_back(n);
        env.push_back({});
        return s;
    }

    int compile(const Expr& e) {
        Node n;
        n.span = e.span;
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) {
                    n.op = Op::Const;
                    n.constant = {Val::Int, x.value, nullptr};
                } else if constexpr (std::is_same_v<T, BoolLit>) {
                    n.op = Op::Const;
                    n.constant = {Val::Bool, x.value ? 1 : 0, nullptr};
                } else if constexpr (std::is_same_v<T, NullLit>) {
                    n.op = Op::Const;
                    n.constant = {Val::Null, 0, nullptr};
                } else if constexpr (std::is_same_v<T, Presence>) {
                    throw EvalError("unresolved presence marker " + x.label);
                } else if constexpr (std::is_same_v<T, VarRef>) {
                    n.op = Op::Var;
                    n.slot = slot(x.name);
                } else if constexpr (std::is_same_v<T, ArrayLit>) {
                    n.op = Op::ArrLit;
                    for (auto& k : x.elems) n.kids.push_back(compile(*k));
                    n.scratch = std::make_shared<Arr>();
                } else if constexpr (std::is_same_v<T, Unary>) {
                    n.op = x.op == UnOp::Not ? Op::Not : Op::Neg;
                    n.kids.push_back(compile(*x.operand));
                } else if constexpr (std::is_same_v<T, Binary>) {
                    n.op = Op::Bin;
                    n.bop = x.op;
                    n.kids.push_back(compile(*x.lhs));
                    n.kids.push_back(compile(*x.rhs));
                } else if constexpr (std::is_same_v<T, Chain>) {
                    n.op = Op::Chain;
                    for (auto& k : x.operands) n.kids.push_back(compile(*k));
                    n.ops = x.ops;
                } else if constexpr (std::is_same_v<T, Length>) {
                    n.op = Op::Len;
                    n.kids.push_back(compile(*x.array));
                } else if constexpr (std::is_same_v<T, Index>) {
                    n.op = Op::Idx;
                    n.kids.push_back(compile(*x.array));
                    n.kids.push_back(compile(*x.index));
                } else if constexpr (std::is_same_v<T, Quantifier>) {
                    auto r = quant_range(x);
                    if (!r) throw EvalError("unbounded quantifier over " + x.var);
                    n.op = Op::Quant;
                    n.qk = x.kind;
                    n.slot = slot(x.var);
                    n.kids.push_back(compile(*r->lo));
                    n.kids.push_back(compile(*r->hi));
                    n.kids.push_back(compile(*x.body));
                }
            },
            e.node);
        nodes.push_back(std::move(n));
        return static_cast<int>(nodes.size()) - 1;
    }

    std::int64_t as_int(int k) {
        Val v = eval(k);
        return v.i;
    }
    bool as_bool(int k) { return eval(k).i != 0; }

    static bool arr_eq(const Val& a, const Val& b) {
        if (a.k == Val::Null || b.k == Val::Null) return a.k == b.k;
        return *a.a == *b.a;
    }

    static bool cmp(BinOp op, std::int64_t a, std::int64_t b) {
        switch (op) {
            case BinOp::Lt: return a < b;
            case BinOp::Le: return a <= b;
            case BinOp::Gt: return a > b;
            case BinOp::Ge: return a >= b;
            case BinOp::Eq: return a == b;
            case BinOp::Ne: return a != b;
            default: return false;
        }
    }

    static std::int64_t ediv(std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b, r = a % b;
        if (r < 0) q += b > 0 ? -1 : 1;
        return q;
    }
    static std::int64_t emod(std::int64_t a, std::int64_t b) {
        std::int64_t r = a % b;
        if (r < 0) r += b > 0 ? b : -b;
        return r;
    }

    Val eval(int k) {
        if (++evals > max_evals) throw BudgetExceeded{};
        Node& n = nodes[k];
        switch (n.op) {
            case Op::Const: return n.constant;
            case Op::Var: {
                Val v = env[n.slot];
                if (v.k == Val::Unset) throw UnboundVariable(slot_names[n.slot]);
                return v;
            }
            case Op::ArrLit: {
                n.scratch->clear();
                for (int c : n.kids) n.scratch->push_back(as_int(c));
                return {Val::Array, 0, n.scratch.get()};
            }
            case Op::Not: return {Val::Bool, as_bool(n.kids[0]) ? 0 : 1, nullptr};
            case Op::Neg: return {Val::Int, -as_int(n.kids[0]), nullptr};
            case Op::Len: {
                Val a = eval(n.kids[0]);
                return {Val::Int, static_cast<std::int64_t>(a.a ? a.a->size() : 0), nullptr};
            }
            case Op::Idx: {
                Val a = eval(n.kids[0]);
                std::int64_t i = as_int(n.kids[1]);
                std::int64_t r = (a.a && i >= 0 && i < static_cast<std::int64_t>(a.a->size())) ? (*a.a)[i] : 0;
                return {Val::Int, r, nullptr};
            }
            case Op::Chain: {
                std::int64_t prev = as_int(n.kids[0]);
                bool ok = true;
                for (size_t j = 1; j < n.kids.size(); ++j) {
                    std::int64_t cur = as_int(n.kids[j]);
                    if (ok && !cmp(n.ops[j - 1], prev, cur)) ok = false;
                    prev = cur;
                }
                return {Val::Bool, ok ? 1 : 0, nullptr};
            }
            case Op::Quant: {
                std::int64_t lo = as_int(n.kids[0]), hi = as_int(n.kids[1]);
                Val saved = env[n.slot];
                bool forall = n.qk == QuantKind::Forall;
                bool result = forall;
                for (std::int64_t v = lo; v < hi; ++v) {
                    env[n.slot] = {Val::Int, v, nullptr};
                    bool b = as_bool(n.kids[2]);
                    if (forall && !b) {
                        result = false;
                        break;
                    }
                    if (!forall && b) {
                        result = true;
                        break;
                    }
                }
                env[n.slot] = saved;
                return {Val::Bool, result ? 1 : 0, nullptr};
            }
            case Op::Bin: break;
        }
        int l = n.kids[0], r = n.kids[1];
        switch (n.bop) {
            case BinOp::And: return {Val::Bool, (as_bool(l) && as_bool(r)) ? 1 : 0, nullptr};
            case BinOp::Or: return {Val::Bool, (as_bool(l) || as_bool(r)) ? 1 : 0, nullptr};
            case BinOp::Implies: return {Val::Bool, (!as_bool(l) || as_bool(r)) ? 1 : 0, nullptr};
            case BinOp::Iff: return {Val::Bool, (as_bool(l) == as_bool(r)) ? 1 : 0, nullptr};
            case BinOp::Eq: case BinOp::Ne: {
                Val a = eval(l), b = eval(r);
                bool e;
                if (a.k == Val::Array || a.k == Val::Null || b.k == Val::Array || b.k == Val::Null) e = arr_eq(a, b);
                else e = a.i == b.i;
                return {Val::Bool, (e == (n.bop == BinOp::Eq)) ? 1 : 0, nullptr};
            }
            case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
                return {Val::Bool, cmp(n.bop, as_int(l), as_int(r)) ? 1 : 0, nullptr};
            case BinOp::Add: return {Val::Int, as_int(l) + as_int(r), nullptr};
            case BinOp::Sub: return {Val::Int, as_int(l) - as_int(r), nullptr};
            case BinOp::Mul: return {Val::Int, as_int(l) * as_int(r), nullptr};
            case BinOp::Div: case BinOp::Mod: {
                std::int64_t a = as_int(l), b = as_int(r);
                if (b == 0) throw DivisionByZero(n.span);
                return {Val::Int, n.bop == BinOp::Div ? ediv(a, b) : emod(a, b), nullptr};
            }
            default: return {};
        }
    }
};

Value to_value(const Val& v) {
    switch (v.k) {
        case Val::Int: return v.i;
        case Val::Bool: return v.i != 0;
        case Val::Array: return *v.a;
        default: return std::int64_t{0};
    }
}

void bind_env(Program_& p, const Env& env, std::deque<Arr>& store) {
    for (auto& [name, v] : env) {
        auto it = p.slots.find(name);
        if (it == p.slots.end()) continue;
        Val& s = p.env[it->second];
        if (auto* i = std::get_if<std::int64_t>(&v)) s = {Val::Int, *i, nullptr};
        else if (auto* b = std::get_if<bool>(&v)) s = {Val::Bool, *b ? 1 : 0, nullptr};
        else {
            store.push_back(std::get<Arr>(v));
            s = {Val::Array, 0, &store.back()};
        }
    }
}

}  // namespace

Value eval_value(const Expr& e, const Env& env) {
    Program_ p;
    int root = p.compile(e);
    std::deque<Arr> store;
    bind_env(p, env, store);
    return to_value(p.eval(root));
}

bool evaluate(const Expr& f, const Env& env) {
    auto v = eval_value(f, env);
    if (auto* b = std::get_if<bool>(&v)) return *b;
    throw EvalError("formula is not boolean");
}

VarTypes infer_types(const Expr& f, const VarTypes& hints) {
    VarTypes t = hints;
    std::map<std::string, Type> guess;
    std::function<void(const Expr&, std::optional<Type>, std::vector<std::string>&)> go;
    auto note = [&](const Expr& e, Type ty, std::vector<std::string>& bound) {
        if (auto* v = std::get_if<VarRef>(&e.node)) {
            if (std::find(bound.begin(), bound.end(), v->name) != bound.end()) return;
            if (!t.count(v->name)) guess.emplace(v->name, ty);
        }
    };
    auto type_of = [&](const Expr& e, std::vector<std::string>& bound) -> std::optional<Type> {
        if (std::holds_alternative<ArrayLit>(e.node) || std::holds_alternative<NullLit>(e.node))
            return Type::IntArray;
        if (std::holds_alternative<BoolLit>(e.node)) return Type::Bool;
        if (std::holds_alternative<IntLit>(e.node) || std::holds_alternative<Length>(e.node) ||
            std::holds_alternative<Index>(e.node))
            return Type::Int;
        if (auto* v = std::get_if<VarRef>(&e.node)) {
            if (std::find(bound.begin(), bound.end(), v->name) != bound.end()) return Type::Int;
            if (t.count(v->name)) return t.at(v->name);
            if (guess.count(v->name)) return guess.at(v->name);
            return std::nullopt;
        }
        if (auto* u = std::get_if<Unary>(&e.node)) return u->op == UnOp::Not ? Type::Bool : Type::Int;
        if (auto* b = std::get_if<Binary>(&e.node)) {
            switch (b->op) {
                case BinOp::Add: case BinOp::Sub: case BinOp::Mul: case BinOp::Div: case BinOp::Mod:
                    return Type::Int;
                default:
                    return Type::Bool;
            }
        }
        return Type::Bool;
    };
    go = [&](const Expr& e, std::optional<Type> want, std::vector<std::string>& bound) {
        if (want) note(e, *want, bound);
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, ArrayLit>) {
                    for (auto& k : x.elems) go(*k, Type::Int, bound);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    go(*x.operand, x.op == UnOp::Not ? Type::Bool : Type::Int, bound);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    switch (x.op) {
                        case BinOp::Eq: case BinOp::Ne: {
                            auto lt = type_of(*x.lhs, bound);
                            auto rt = type_of(*x.rhs, bound);
                            go(*x.lhs, rt, bound);
                            go(*x.rhs, lt, bound);
                            break;
                        }
                        case BinOp::And: case BinOp::Or: case BinOp::Implies: case BinOp::Iff:
                            go(*x.lhs, Type::Bool, bound);
                            go(*x.rhs, Type::Bool, bound);
                            break;
                        default:
                            go(*x.lhs, Type::Int, bound);
                            go(*x.rhs, Type::Int, bound);
                    }
                } else if constexpr (std::is_same_v<T, Chain>) {
                    for (auto& k : x.operands) go(*k, Type::Int, bound);
                } else if constexpr (std::is_same_v<T, Length>) {
                    go(*x.array, Type::IntArray, bound);
                } else if constexpr (std::is_same_v<T, Index>) {
                    go(*x.array, Type::IntArray, bound);
                    go(*x.index, Type::Int, bound);
                } else if constexpr (std::is_same_v<T, Quantifier>) {
                    bound.push_back(x.var);
                    go(*x.body, Type::Bool, bound);
                    bound.pop_back();
                }
            },
            e.node);
    };
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<std::string> bound;
        go(f, Type::Bool, bound);
    }
    for (auto& v : free_vars(f))
        if (!t.count(v)) t[v] = guess.count(v) ? guess.at(v) : Type::Int;
    return t;
}

namespace {

std::vector<std::int64_t> int_order(const BoundedDomain& d) {
    std::vector<std::int64_t> xs;
    std::int64_t m = std::max(std::abs(d.int_lo), std::abs(d.int_hi));
    for (std::int64_t k = 0; k <= m; ++k) {
        if (k == 0) {
            if (d.int_lo <= 0 && 0 <= d.int_hi) xs.push_back(0);
            continue;
        }
        if (k >= d.int_lo && k <= d.int_hi) xs.push_back(k);
        if (-k >= d.int_lo && -k <= d.int_hi) xs.push_back(-k);
    }
    return xs;
}

class BoundedChecker {
public:
    BoundedChecker(const ExprPtr& vc, const VarTypes& types, const BoundedDomain& d, std::uint64_t budget)
        : ints_(int_order(d)), elems_(ints_) {
        std::set<std::int64_t> extra;
        visit(vc, [&](const ExprPtr& e) {
            if (auto* k = std::get_if<IntLit>(&e->node))
                for (auto c : {k->value, k->value - 1, k->value + 1, -k->value, -k->value - 1, -k->value + 1})
                    if (c < d.int_lo || c > d.int_hi) extra.insert(c);
        });
        std::vector<std::int64_t> ex(extra.begin(), extra.end());
        std::stable_sort(ex.begin(), ex.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
        ints_.insert(ints_.end(), ex.begin(), ex.end());
        ExprPtr cur = vc;
        while (auto* b = std::get_if<Binary>(&cur->node)) {
            if (b->op != BinOp::Implies) break;
            for (auto& c : conjuncts(b->lhs)) ante_exprs_.push_back(c);
            cur = b->rhs;
        }
        target_expr_ = cur;
        p_.max_evals = budget;
        std::vector<std::string> order;
        for (auto& a : ante_exprs_) collect_free_vars(*a, order);
        collect_free_vars(*target_expr_, order);
        for (auto& v : order) {
            int s = p_.slot(v);
            free_slots_.push_back(s);
            auto it = types.find(v);
            slot_type_[s] = it == types.end() ? Type::Int : it->second;
        }
        for (auto& a : ante_exprs_) {
            Item it;
            it.node = p_.compile(*a);
            for (auto& v : free_vars(*a)) it.vars.push_back(p_.slots.at(v));
            sort_by_order(it.vars);
            if (auto* b = std::get_if<Binary>(&a->node); b && b->op == BinOp::Eq) {
                for (int side = 0; side < 2; ++side) {
                    auto& l = side ? b->rhs : b->lhs;
                    auto& r = side ? b->lhs : b->rhs;
                    if (auto* v = std::get_if<VarRef>(&l->node); v && !free_vars(*r).count(v->name)) {
                        it.defs.push_back({p_.slots.at(v->name), p_.compile(*r), {}});
                        for (auto& w : free_vars(*r)) it.defs.back().deps.push_back(p_.slots.at(w));
                    }
                }
            }
            items_.push_back(std::move(it));
        }
        target_.node = p_.compile(*target_expr_);
        for (auto& v : free_vars(*target_expr_)) target_.vars.push_back(p_.slots.at(v));
        sort_by_order(target_.vars);
        for (int l = 0; l <= d.max_array_len; ++l) gen_arrays(l);
    }

    Verdict run() {
        Verdict v;
        v.backend = Backend::Bounded;
        try {
            if (search(0)) {
                v.status = VerdictStatus::Invalid;
                v.witness = witness_;
            } else {
                v.status = VerdictStatus::Valid;
            }
        } catch (const BudgetExceeded&) {
            v.status = VerdictStatus::Unknown;
            v.note = "evaluation budget exhausted";
        }
        return v;
    }

private:
    struct Def {
        int slot;
        int rhs;
        std::vector<int> deps;
    };
    struct Item {
        int node = -1;
        std::vector<int> vars;
        std::vector<Def> defs;
    };

    Program_ p_;
    // scalars also range over literals of the vc that fall outside the domain
    std::vector<std::int64_t> ints_;
    std::vector<std::int64_t> elems_;
    std::vector<Arr> arrays_;
    std::deque<Arr> def_store_;
    std::vector<ExprPtr> ante_exprs_;
    ExprPtr target_expr_;
    std::vector<Item> items_;
    Item target_;
    std::vector<int> free_slots_;
    std::map<int, Type> slot_type_;
    Env witness_;

    void sort_by_order(std::vector<int>& vs) const {
        auto pos = [&](int s) { return std::find(free_slots_.begin(), free_slots_.end(), s) - free_slots_.begin(); };
        std::sort(vs.begin(), vs.end(), [&](int a, int b) { return pos(a) < pos(b); });
    }

    void gen_arrays(int len) {
        Arr cur(len);
        std::function<void(int)> rec = [&](int k) {
            if (k == len) {
                arrays_.push_back(cur);
                return;
            }
            for (auto v : elems_) {
                cur[k] = v;
                rec(k + 1);
            }
        };
        rec(0);
    }

    bool bound(int s) const { return p_.env[s].k != Val::Unset; }

    template <class F>
    bool enumerate(const std::vector<int>& vars, size_t k, F&& body) {
        while (k < vars.size() && bound(vars[k])) ++k;
        if (k == vars.size()) return body();
        int s = vars[k];
        Type ty = slot_type_.count(s) ? slot_type_.at(s) : Type::Int;
        bool found = false;
        if (ty == Type::Bool) {
            for (int b : {0, 1}) {
                p_.env[s] = {Val::Bool, b, nullptr};
                if (enumerate(vars, k + 1, body)) {
                    found = true;
                    break;
                }
            }
        } else if (ty == Type::IntArray) {
            for (auto& a : arrays_) {
                p_.env[s] = {Val::Array, 0, &a};
                if (enumerate(vars, k + 1, body)) {
                    found = true;
                    break;
                }
            }
        } else {
            for (auto i : ints_) {
                p_.env[s] = {Val::Int, i, nullptr};
                if (enumerate(vars, k + 1, body)) {
                    found = true;
                    break;
                }
            }
        }
        if (!found) p_.env[s] = {};
        return found;
    }

    bool holds(int node, bool& ok) {
        try {
            ok = true;
            return p_.eval(node).i != 0;
        } catch (const EvalError&) {
            ok = false;
            return false;
        }
    }

    bool search(size_t k) {
        if (k == items_.size()) {
            return enumerate(target_.vars, 0, [&] {
                bool ok;
                bool t = holds(target_.node, ok);
                if (!ok || t) return false;
                record_witness();
                return true;
            });
        }
        Item& it = items_[k];
        for (auto& d : it.defs) {
            if (bound(d.slot)) continue;
            bool ready = true;
            for (int s : d.deps)
                if (!bound(s)) ready = false;
            if (!ready) continue;
            Val v;
            try {
                v = p_.eval(d.rhs);
            } catch (const EvalError&) {
                return false;
            }
            if (v.k == Val::Array) {
                def_store_.push_back(*v.a);
                v.a = &def_store_.back();
            }
            p_.env[d.slot] = v;
            bool found = search_item(k);
            if (!found) p_.env[d.slot] = {};
            return found;
        }
        return search_item(k);
    }

    bool search_item(size_t k) {
        return enumerate(items_[k].vars, 0, [&] {
            bool ok;
            if (!holds(items_[k].node, ok)) return false;
            return search(k + 1);
        });
    }

    void record_witness() {
        witness_.clear();
        for (int s : free_slots_) {
            auto& v = p_.env[s];
            if (v.k != Val::Unset) witness_[p_.slot_names[s]] = to_value(v);
        }
    }
};

}  // namespace

Verdict check_bounded(const ExprPtr& vc, const VarTypes& types, const BoundedDomain& d,
                      std::uint64_t max_evaluations) {
    auto start = std::chrono::steady_clock::now();
    auto ty = infer_types(*vc, types);
    BoundedChecker c(vc, ty, d, max_evaluations);
    auto v = c.run();
    v.elapsed = std::chrono::steady_clock::now() - start;
    return v;
}

Verdict check_validity(const ExprPtr& vc, const VarTypes& types, const SolverConfig& cfg) {
    if (cfg.backend == Backend::Smt) return check_smt(vc, types, cfg.smt_cmd, cfg.timeout_ms);
    return check_bounded(vc, types, cfg.domain, cfg.max_evaluations);
}

Verdict Solver::check(const ExprPtr& vc, const VarTypes& types) {
    std::string key = print_expr(*vc);
    for (auto& [k, t] : types) key += "|" + k + ":" + coevo::to_string(t);
    {
        std::lock_guard<std::mutex> g(mu_);
        ++queries_;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    auto v = check_validity(vc, types, cfg_);
    std::lock_guard<std::mutex> g(mu_);
    cache_.emplace(key, v);
    return v;
}

bool Solver::valid(const ExprPtr& f, const VarTypes& types) {
    return check(f, types).status == VerdictStatus::Valid;
}

bool Solver::unsat(const ExprPtr& f, const VarTypes& types) { return valid(mk_not(f), types); }

}  // namespace coevo
