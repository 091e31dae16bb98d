#include "coevo/printer.hpp"

#include <sstream>

#include "coevo/parser.hpp"

namespace coevo {

std::string to_string(Type t) {
    switch (t) {
        case Type::Int: return "int";
        case Type::Bool: return "bool";
        case Type::IntArray: return "array<int>";
    }
    return "?";
}

namespace {

int prec_of(BinOp op) {
    switch (op) {
        case BinOp::Iff: return 1;
        case BinOp::Implies: return 2;
        case BinOp::Or: return 3;
        case BinOp::And: return 4;
        case BinOp::Add: case BinOp::Sub: return 6;
        case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 7;
        default: return 5;
    }
}

const char* op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
        case BinOp::Implies: return "==>";
        case BinOp::Iff: return "<==>";
    }
    return "?";
}

int prec_of(const Expr& e) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Binary>) return prec_of(n.op);
            else if constexpr (std::is_same_v<T, Chain>) return 5;
            else if constexpr (std::is_same_v<T, Unary>) return 8;
            else if constexpr (std::is_same_v<T, IntLit>) return n.value < 0 ? 8 : 10;
            else if constexpr (std::is_same_v<T, Quantifier>) return 0;
            else if constexpr (std::is_same_v<T, Index> || std::is_same_v<T, Length>) return 9;
            else return 10;
        },
        e.node);
}

void pr(std::ostream& os, const Expr& e, int ctx);

void pr_operand(std::ostream& os, const Expr& e, int ctx) {
    if (prec_of(e) < ctx) {
        os << '(';
        pr(os, e, 0);
        os << ')';
    } else {
        pr(os, e, ctx);
    }
}

void pr(std::ostream& os, const Expr& e, int ctx) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                os << n.value;
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                os << (n.value ? "true" : "false");
            } else if constexpr (std::is_same_v<T, NullLit>) {
                os << "null";
            } else if constexpr (std::is_same_v<T, VarRef>) {
                os << n.name;
            } else if constexpr (std::is_same_v<T, Presence>) {
                os << "presence(" << n.label << ")";
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                os << "new int[]{";
                for (size_t i = 0; i < n.elems.size(); ++i) {
                    if (i) os << ',';
                    pr(os, *n.elems[i], 0);
                }
                os << '}';
            } else if constexpr (std::is_same_v<T, Unary>) {
                os << (n.op == UnOp::Not ? "!" : "-");
                auto* lit = std::get_if<IntLit>(&n.operand->node);
                if (n.op == UnOp::Neg && lit && lit->value >= 0) {
                    os << '(' << lit->value << ')';
                } else {
                    pr_operand(os, *n.operand, 8);
                }
            } else if constexpr (std::is_same_v<T, Binary>) {
                int p = prec_of(n.op);
                int lctx = p, rctx = p + 1;
                if (n.op == BinOp::Implies) {
                    lctx = p + 1;
                    rctx = p;
                } else if (p == 5) {
                    lctx = rctx = 6;
                }
                auto operand = [&](const Expr& x, int c) {
                    auto* xb = std::get_if<Binary>(&x.node);
                    if (n.op == BinOp::Or && xb && xb->op == BinOp::And) c = 5;
                    pr_operand(os, x, c);
                };
                operand(*n.lhs, lctx);
                os << ' ' << op_text(n.op) << ' ';
                operand(*n.rhs, rctx);
            } else if constexpr (std::is_same_v<T, Chain>) {
                for (size_t i = 0; i < n.operands.size(); ++i) {
                    if (i) os << ' ' << op_text(n.ops[i - 1]) << ' ';
                    pr_operand(os, *n.operands[i], 6);
                }
            } else if constexpr (std::is_same_v<T, Length>) {
                pr_operand(os, *n.array, 9);
                os << ".Length";
            } else if constexpr (std::is_same_v<T, Index>) {
                pr_operand(os, *n.array, 9);
                os << '[';
                pr(os, *n.index, 0);
                os << ']';
            } else if constexpr (std::is_same_v<T, Quantifier>) {
                os << (n.kind == QuantKind::Forall ? "forall " : "exists ") << n.var << " :: ";
                pr(os, *n.body, 0);
            }
        },
        e.node);
    (void)ctx;
}

struct Printer {
    const PrintOptions& opts;
    std::ostringstream os;

    bool user_trusted(StmtId id, const TrustTag& t) const {
        if (t.patched()) return false;
        return t.trusted || opts.extra_trusted.count(id);
    }
    static std::string marker(const TrustTag& t) { return t.patched() ? std::string(" ") + kPatchedMarker : ""; }
    std::string attr(StmtId id, const TrustTag& t) const { return user_trusted(id, t) ? " {:trusted}" : ""; }
    std::string trailing(StmtId id, const TrustTag& t) const {
        if (t.patched()) return marker(t);
        return user_trusted(id, t) ? " // {:trusted}" : "";
    }

    void indent(int n) { os << std::string(n * 2, ' '); }

    void clause(const char* kw, const Clause& c, int ind) {
        indent(ind);
        os << kw << attr(c.id, c.trust) << ' ';
        pr(os, *c.expr, 0);
        os << marker(c.trust) << '\n';
    }

    void rhs(const Rhs& r) {
        if (auto* e = std::get_if<ExprPtr>(&r)) {
            pr(os, **e, 0);
        } else {
            auto& c = std::get<Call>(r);
            os << c.callee << '(';
            for (size_t i = 0; i < c.args.size(); ++i) {
                if (i) os << ", ";
                pr(os, *c.args[i], 0);
            }
            os << ')';
        }
    }

    void loop_specs(const std::vector<Clause>& invs, const std::optional<Clause>& dec, int ind) {
        for (auto& c : invs) clause("invariant", c, ind + 1);
        if (dec) clause("decreases", *dec, ind + 1);
    }

    void block(const Block& b, int ind) {
        for (auto& s : b) stmt(s, ind);
    }

    void if_stmt(const Stmt& s, const If& n, int ind, bool chained) {
        if (!chained) indent(ind);
        os << "if" << attr(s.id, s.trust) << ' ';
        pr(os, *n.cond, 0);
        os << " {" << marker(s.trust) << '\n';
        block(n.then_block, ind + 1);
        indent(ind);
        os << '}';
        if (n.else_block) {
            auto& eb = *n.else_block;
            if (eb.size() == 1 && std::holds_alternative<If>(eb[0].node)) {
                os << " else ";
                if_stmt(eb[0], std::get<If>(eb[0].node), ind, true);
                return;
            }
            os << " else {\n";
            block(eb, ind + 1);
            indent(ind);
            os << '}';
        }
        os << '\n';
    }

    void stmt(const Stmt& s, int ind) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, VarDecl>) {
                    indent(ind);
                    os << "var" << attr(s.id, s.trust) << ' ' << n.name;
                    if (n.type) os << ": " << to_string(*n.type);
                    if (n.init) {
                        os << " := ";
                        rhs(*n.init);
                    }
                    os << ';' << marker(s.trust) << '\n';
                } else if constexpr (std::is_same_v<T, Assign>) {
                    indent(ind);
                    os << n.target << " := ";
                    rhs(n.value);
                    os << ';' << trailing(s.id, s.trust) << '\n';
                } else if constexpr (std::is_same_v<T, Assert>) {
                    indent(ind);
                    os << "assert" << attr(s.id, s.trust) << ' ';
                    pr(os, *n.expr, 0);
                    os << ';' << marker(s.trust) << '\n';
                } else if constexpr (std::is_same_v<T, Assume>) {
                    indent(ind);
                    os << "assume" << attr(s.id, s.trust) << ' ';
                    pr(os, *n.expr, 0);
                    os << ';' << marker(s.trust) << '\n';
                } else if constexpr (std::is_same_v<T, If>) {
                    if_stmt(s, n, ind, false);
                } else if constexpr (std::is_same_v<T, While>) {
                    indent(ind);
                    os << "while" << attr(s.id, s.trust) << ' ';
                    pr(os, *n.guard, 0);
                    os << marker(s.trust) << '\n';
                    loop_specs(n.invariants, n.decreases, ind);
                    indent(ind);
                    os << "{\n";
                    block(n.body, ind + 1);
                    indent(ind);
                    os << "}\n";
                } else if constexpr (std::is_same_v<T, For>) {
                    indent(ind);
                    os << "for" << attr(s.id, s.trust) << ' ' << n.var << " := ";
                    pr(os, *n.lo, 0);
                    os << " to ";
                    pr(os, *n.hi, 0);
                    os << marker(s.trust) << '\n';
                    loop_specs(n.invariants, n.decreases, ind);
                    indent(ind);
                    os << "{\n";
                    block(n.body, ind + 1);
                    indent(ind);
                    os << "}\n";
                } else if constexpr (std::is_same_v<T, Break>) {
                    indent(ind);
                    os << "break;" << trailing(s.id, s.trust) << '\n';
                }
            },
            s.node);
    }

    static std::string params(const std::vector<Param>& ps) {
        std::string r;
        for (size_t i = 0; i < ps.size(); ++i) {
            if (i) r += ", ";
            r += ps[i].name + ": " + to_string(ps[i].type);
        }
        return r;
    }

    void method(const Method& m) {
        os << "method" << attr(m.id, m.trust) << ' ' << m.name << '(' << params(m.params) << ')';
        if (!m.returns.empty()) os << " returns (" << params(m.returns) << ')';
        os << marker(m.trust) << '\n';
        for (auto& c : m.requires_) clause("requires", c, 1);
        for (auto& c : m.ensures) clause("ensures", c, 1);
        if (m.body) {
            os << "{\n";
            block(*m.body, 1);
            os << "}\n";
        }
    }
};

}  // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    pr(os, e, 0);
    return os.str();
}

std::string print_expr(const ExprPtr& e) { return print_expr(*e); }

std::string print_method(const Method& m, const PrintOptions& opts) {
    Printer p{opts, {}};
    p.method(m);
    return p.os.str();
}

std::string print_program(const Program& prog, const PrintOptions& opts) {
    Printer p{opts, {}};
    for (size_t i = 0; i < prog.methods.size(); ++i) {
        if (i) p.os << '\n';
        p.method(prog.methods[i]);
    }
    return p.os.str();
}

Method test_as_method(const Test& t) {
    Method m;
    m.name = t.name;
    m.trust = t.trust;
    m.span = t.span;
    Block body;
    for (auto& in : t.inputs) {
        Stmt s;
        s.node = VarDecl{in.name, std::nullopt, Rhs{in.value}};
        body.push_back(std::move(s));
    }
    Stmt call;
    call.node = VarDecl{t.result, std::nullopt, Rhs{Call{t.callee, t.args}}};
    body.push_back(std::move(call));
    for (auto& o : t.oracle) {
        Stmt s;
        s.id = o.id;
        if (o.trust != t.trust) s.trust = o.trust;
        s.node = Assert{o.expr};
        body.push_back(std::move(s));
    }
    m.body = std::move(body);
    return m;
}

std::string print_test(const Test& t) { return print_method(test_as_method(t)); }

}  // namespace coevo
