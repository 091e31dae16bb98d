#include "coevo/quant.hpp"

#include "coevo/expr.hpp"

namespace coevo {

namespace {

bool is_var(const ExprPtr& e, const std::string& v) {
    auto* r = std::get_if<VarRef>(&e->node);
    return r && r->name == v;
}

ExprPtr plus1(const ExprPtr& e) {
    if (auto* i = std::get_if<IntLit>(&e->node)) return mk_int(i->value + 1);
    return mk_bin(BinOp::Add, e, mk_int(1));
}

struct Bounds {
    ExprPtr lo, hi;
    void lower(const ExprPtr& e, bool strict) {
        if (!lo) lo = strict ? plus1(e) : e;
    }
    void upper(const ExprPtr& e, bool strict) {
        if (!hi) hi = strict ? e : plus1(e);
    }
    // a op b where one side is v
    void relation(const ExprPtr& a, BinOp op, const ExprPtr& b, const std::string& v) {
        bool av = is_var(a, v), bv = is_var(b, v);
        if (av == bv) return;
        const ExprPtr& other = av ? b : a;
        if (mentions_any(*other, {v})) return;
        if (bv) {
            switch (op) {
                case BinOp::Lt: op = BinOp::Gt; break;
                case BinOp::Le: op = BinOp::Ge; break;
                case BinOp::Gt: op = BinOp::Lt; break;
                case BinOp::Ge: op = BinOp::Le; break;
                default: break;
            }
        }
        // now: v op other
        switch (op) {
            case BinOp::Lt: upper(other, true); break;
            case BinOp::Le: upper(other, false); break;
            case BinOp::Gt: lower(other, true); break;
            case BinOp::Ge: lower(other, false); break;
            case BinOp::Eq:
                lower(other, false);
                upper(other, false);
                break;
            default: break;
        }
    }
};

}  // namespace

std::optional<QuantRange> quant_range(const Quantifier& q) {
    std::vector<ExprPtr> parts;
    auto* b = std::get_if<Binary>(&q.body->node);
    if (q.kind == QuantKind::Forall) {
        if (!b || b->op != BinOp::Implies) return std::nullopt;
        parts = conjuncts(b->lhs);
    } else {
        parts = conjuncts(q.body);
    }
    Bounds bd;
    for (auto& p : parts) {
        if (auto* c = std::get_if<Chain>(&p->node)) {
            for (size_t i = 0; i + 1 < c->operands.size(); ++i)
                bd.relation(c->operands[i], c->ops[i], c->operands[i + 1], q.var);
        } else if (auto* x = std::get_if<Binary>(&p->node); x && is_comparison(x->op)) {
            bd.relation(x->lhs, x->op, x->rhs, q.var);
        }
    }
    if (!bd.lo || !bd.hi) return std::nullopt;
    return QuantRange{bd.lo, bd.hi};
}

}  // namespace coevo
