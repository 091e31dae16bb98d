#include "coevo/ast.hpp"

namespace coevo {

namespace {

bool eq(const ExprPtr& a, const ExprPtr& b) { return structurally_equal(*a, *b); }

bool eq(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const Clause& a, const Clause& b) { return a.id == b.id && a.trust == b.trust && eq(a.expr, b.expr); }

bool eq(const std::vector<Clause>& a, const std::vector<Clause>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const std::optional<Clause>& a, const std::optional<Clause>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || eq(*a, *b);
}

bool eq(const Rhs& a, const Rhs& b) {
    if (a.index() != b.index()) return false;
    if (auto* x = std::get_if<ExprPtr>(&a)) return eq(*x, std::get<ExprPtr>(b));
    auto& c = std::get<Call>(a);
    auto& d = std::get<Call>(b);
    return c.callee == d.callee && eq(c.args, d.args);
}

bool eq(const Block& a, const Block& b);

bool eq(const Stmt& a, const Stmt& b) {
    if (a.id != b.id || !(a.trust == b.trust) || a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, VarDecl>) {
                if (x.name != y.name || x.type != y.type || x.init.has_value() != y.init.has_value()) return false;
                return !x.init || eq(*x.init, *y.init);
            } else if constexpr (std::is_same_v<T, Assign>) {
                return x.target == y.target && eq(x.value, y.value);
            } else if constexpr (std::is_same_v<T, Assert> || std::is_same_v<T, Assume>) {
                return eq(x.expr, y.expr);
            } else if constexpr (std::is_same_v<T, If>) {
                if (!eq(x.cond, y.cond) || !eq(x.then_block, y.then_block)) return false;
                if (x.else_block.has_value() != y.else_block.has_value()) return false;
                return !x.else_block || eq(*x.else_block, *y.else_block);
            } else if constexpr (std::is_same_v<T, While>) {
                return eq(x.guard, y.guard) && eq(x.invariants, y.invariants) && eq(x.decreases, y.decreases) &&
                       eq(x.body, y.body);
            } else if constexpr (std::is_same_v<T, For>) {
                return x.var == y.var && eq(x.lo, y.lo) && eq(x.hi, y.hi) && eq(x.invariants, y.invariants) &&
                       eq(x.decreases, y.decreases) && eq(x.body, y.body);
            } else {
                return true;
            }
        },
        a.node);
}

bool eq(const Block& a, const Block& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || a[i].type != b[i].type) return false;
    return true;
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, BoolLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, NullLit>) return true;
            else if constexpr (std::is_same_v<T, VarRef>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, Presence>) return x.fingerprint == y.fingerprint;
            else if constexpr (std::is_same_v<T, ArrayLit>) return eq(x.elems, y.elems);
            else if constexpr (std::is_same_v<T, Unary>) return x.op == y.op && eq(x.operand, y.operand);
            else if constexpr (std::is_same_v<T, Binary>) return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, Chain>) return x.ops == y.ops && eq(x.operands, y.operands);
            else if constexpr (std::is_same_v<T, Length>) return eq(x.array, y.array);
            else if constexpr (std::is_same_v<T, Index>) return eq(x.array, y.array) && eq(x.index, y.index);
            else if constexpr (std::is_same_v<T, Quantifier>) return x.kind == y.kind && x.var == y.var && eq(x.body, y.body);
        },
        a.node);
}

bool structurally_equal(const Program& a, const Program& b) {
    if (a.methods.size() != b.methods.size()) return false;
    for (size_t i = 0; i < a.methods.size(); ++i) {
        auto& x = a.methods[i];
        auto& y = b.methods[i];
        if (x.id != y.id || x.name != y.name || !(x.trust == y.trust) || !eq(x.params, y.params) ||
            !eq(x.returns, y.returns) || !eq(x.requires_, y.requires_) || !eq(x.ensures, y.ensures))
            return false;
        if (x.body.has_value() != y.body.has_value()) return false;
        if (x.body && !eq(*x.body, *y.body)) return false;
    }
    return true;
}

}  // namespace coevo
