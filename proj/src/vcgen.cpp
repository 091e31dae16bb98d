#include "coevo/vcgen.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/printer.hpp"

namespace coevo {

const char* to_string(VcKind k) {
    switch (k) {
        case VcKind::Postcondition: return "postcondition";
        case VcKind::IntermediateAssert: return "intermediate_assert";
        case VcKind::WfCheck: return "wf_check";
        case VcKind::InvariantEntry: return "invariant_entry";
        case VcKind::InvariantMaintain: return "invariant_maintain";
        case VcKind::SignatureWf: return "signature_wf";
    }
    return "?";
}

std::vector<StmtId> VcPartition::path_ids() const {
    std::vector<StmtId> ids;
    for (auto& s : path)
        if (s.prov.node.valid() && (ids.empty() || ids.back() != s.prov.node)) ids.push_back(s.prov.node);
    return ids;
}

std::vector<ExprPtr> VcPartition::antecedents() const {
    std::vector<ExprPtr> r;
    for (auto& s : path) r.push_back(s.formula);
    return r;
}

std::string node_key(const std::string& method, const std::string& kind, const std::string& text) {
    return method + "/" + kind + "/" + text;
}

namespace {

void wf_rec(const ExprPtr& e, std::vector<WfFrame>& ctx, std::vector<WfObligation>& out) {
    auto emit = [&](ExprPtr bound, ExprPtr site, const char* what) {
        WfObligation ob;
        ob.frames = ctx;
        ob.bound = bound;
        ob.site = site;
        ob.what = what;
        ExprPtr c = bound;
        for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
            if (!it->var.empty()) c = mk_quant(QuantKind::Forall, it->var, c);
            else c = mk_implies(it->guard, c);
        }
        ob.closed = c;
        out.push_back(std::move(ob));
    };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ArrayLit>) {
                for (auto& k : x.elems) wf_rec(k, ctx, out);
            } else if constexpr (std::is_same_v<T, Unary>) {
                wf_rec(x.operand, ctx, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                wf_rec(x.lhs, ctx, out);
                switch (x.op) {
                    case BinOp::And:
                    case BinOp::Implies:
                        ctx.push_back({"", x.lhs});
                        wf_rec(x.rhs, ctx, out);
                        ctx.pop_back();
                        break;
                    case BinOp::Or:
                        ctx.push_back({"", mk_not(x.lhs)});
                        wf_rec(x.rhs, ctx, out);
                        ctx.pop_back();
                        break;
                    case BinOp::Div:
                    case BinOp::Mod: {
                        wf_rec(x.rhs, ctx, out);
                        auto* lit = std::get_if<IntLit>(&x.rhs->node);
                        if (!lit || lit->value == 0)
                            emit(mk_bin(BinOp::Ne, x.rhs, mk_int(0)), e, "possible division by zero");
                        break;
                    }
                    default:
                        wf_rec(x.rhs, ctx, out);
                }
            } else if constexpr (std::is_same_v<T, Chain>) {
                for (auto& k : x.operands) wf_rec(k, ctx, out);
            } else if constexpr (std::is_same_v<T, Length>) {
                wf_rec(x.array, ctx, out);
            } else if constexpr (std::is_same_v<T, Index>) {
                wf_rec(x.array, ctx, out);
                wf_rec(x.index, ctx, out);
                emit(bounds_of(x.array, x.index), e, "index out of range");
            } else if constexpr (std::is_same_v<T, Quantifier>) {
                ctx.push_back({x.var, nullptr});
                wf_rec(x.body, ctx, out);
                ctx.pop_back();
            }
        },
        e->node);
}

std::string rhs_text(const Rhs& r) {
    if (auto* e = std::get_if<ExprPtr>(&r)) return print_expr(**e);
    auto& c = std::get<Call>(r);
    std::string s = c.callee + "(";
    for (size_t i = 0; i < c.args.size(); ++i) s += (i ? ", " : "") + print_expr(c.args[i]);
    return s + ")";
}

std::string stmt_text(const Stmt& s) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarDecl>) return "var " + n.name + (n.init ? " := " + rhs_text(*n.init) : "");
            else if constexpr (std::is_same_v<T, Assign>) return n.target + " := " + rhs_text(n.value);
            else if constexpr (std::is_same_v<T, Assert>) return "assert " + print_expr(n.expr);
            else if constexpr (std::is_same_v<T, Assume>) return "assume " + print_expr(n.expr);
            else if constexpr (std::is_same_v<T, If>) return "if " + print_expr(n.cond);
            else if constexpr (std::is_same_v<T, While>) return "while " + print_expr(n.guard);
            else if constexpr (std::is_same_v<T, For>)
                return "for " + n.var + " := " + print_expr(n.lo) + " to " + print_expr(n.hi);
            else return "break";
        },
        s.node);
}

using IncMap = std::map<std::string, std::string>;

class Builder {
public:
    Builder(const Method& m, const Program& p) : m_(m), prog_(p) { g_.method = m.name; }

    PassiveGraph run() {
        cur_ = new_block();
        for (auto& p : m_.params) bind_param(p);
        for (auto& r : m_.returns) bind_param(r);
        for (auto& c : m_.requires_) {
            auto pv = clause_prov(c, "requires");
            PassiveStmt s;
            s.op = PassiveStmt::Op::Assume;
            s.formula = ssa(c.expr);
            s.prov = pv;
            emit(s);
        }
        block(*m_.body);
        if (cur_ >= 0) {
            for (auto& c : m_.ensures) {
                auto pv = clause_prov(c, "ensures");
                int grp = group_++;
                for (auto& part : conjuncts(c.expr)) {
                    PassiveStmt s;
                    s.op = PassiveStmt::Op::Assert;
                    s.formula = ssa(part);
                    s.prov = pv;
                    s.kind = VcKind::Postcondition;
                    s.group = grp;
                    emit(s);
                }
            }
        }
        for (auto& b : g_.blocks)
            if (b.stmts.empty()) b.stmts.push_back(PassiveStmt{});
        return std::move(g_);
    }

private:
    const Method& m_;
    const Program& prog_;
    PassiveGraph g_;
    IncMap inc_;
    std::map<std::string, int> counter_;
    std::map<std::string, Type> src_types_;
    int cur_ = -1;
    int uid_ = 0;
    int group_ = 0;
    std::vector<std::vector<std::pair<int, IncMap>>> breaks_;

    int new_block() {
        PassiveBlock b;
        b.id = "b" + std::to_string(g_.blocks.size());
        g_.blocks.push_back(std::move(b));
        return static_cast<int>(g_.blocks.size()) - 1;
    }

    void edge(int a, int b) { g_.blocks[a].successors.push_back(g_.blocks[b].id); }

    void emit(PassiveStmt s) {
        if (cur_ < 0) return;
        s.uid = uid_++;
        g_.blocks[cur_].stmts.push_back(std::move(s));
    }

    void emit_in(int b, PassiveStmt s) {
        s.uid = uid_++;
        g_.blocks[b].stmts.push_back(std::move(s));
    }

    std::string fresh_name(const std::string& v) {
        int k = counter_[v]++;
        return k == 0 ? v : v + "@" + std::to_string(k);
    }

    std::string fresh(const std::string& v, Type t) {
        auto n = fresh_name(v);
        inc_[v] = n;
        g_.types[n] = t;
        src_types_[v] = t;
        return n;
    }

    void bind_param(const Param& p) { fresh(p.name, p.type); }

    ExprPtr ssa(const ExprPtr& e) {
        std::map<std::string, ExprPtr> sub;
        for (auto& v : free_vars(*e)) {
            auto it = inc_.find(v);
            if (it != inc_.end() && it->second != v) sub[v] = mk_var(it->second);
        }
        return substitute(e, sub);
    }

    Provenance clause_prov(const Clause& c, const std::string& kind, const std::string& method = "") {
        Provenance p;
        p.node = c.id;
        p.line = c.span.begin.line;
        p.role = NodeRole::SpecClause;
        p.trusted = c.trust.trusted;
        p.clause_kind = kind;
        p.method = method.empty() ? m_.name : method;
        p.text = kind + " " + print_expr(c.expr);
        p.node_key = node_key(p.method, kind, normal_key(c.expr));
        return p;
    }

    Provenance stmt_prov(const Stmt& s) {
        Provenance p;
        p.node = s.id;
        p.line = s.span.begin.line;
        p.role = NodeRole::ProgramStmt;
        p.trusted = s.trust.trusted;
        p.clause_kind = "stmt";
        p.method = m_.name;
        p.text = stmt_text(s);
        p.node_key = node_key(m_.name, "stmt", p.text);
        return p;
    }

    Provenance glue_prov() {
        Provenance p;
        p.method = m_.name;
        return p;
    }

    void emit_wf(const ExprPtr& src, const Provenance& pv) {
        for (auto& ob : wf_obligations(ssa(src))) {
            PassiveStmt s;
            s.op = PassiveStmt::Op::Assert;
            s.formula = ob.closed;
            s.prov = pv;
            s.kind = VcKind::WfCheck;
            s.wf = true;
            s.wf_site = pv.method + "/" + pv.clause_kind + "/" + print_expr(strip_ssa(ob.site));
            s.wf_what = ob.what;
            s.group = group_++;
            emit(s);
        }
    }

    void assume_eq(const std::string& name, const ExprPtr& value, const Provenance& pv) {
        PassiveStmt s;
        s.op = PassiveStmt::Op::Assume;
        s.formula = mk_eq(mk_var(name), value);
        s.prov = pv;
        emit(s);
    }

    Type type_of(const ExprPtr& e) {
        auto hints = g_.types;
        for (auto& [v, t] : src_types_) hints[v] = t;
        if (std::holds_alternative<ArrayLit>(e->node)) return Type::IntArray;
        if (auto* v = std::get_if<VarRef>(&e->node)) {
            auto it = src_types_.find(v->name);
            if (it != src_types_.end()) return it->second;
        }
        if (std::holds_alternative<BoolLit>(e->node) || std::holds_alternative<Chain>(e->node) ||
            std::holds_alternative<Quantifier>(e->node))
            return Type::Bool;
        if (auto* u = std::get_if<Unary>(&e->node)) return u->op == UnOp::Not ? Type::Bool : Type::Int;
        if (auto* b = std::get_if<Binary>(&e->node)) {
            switch (b->op) {
                case BinOp::Add: case BinOp::Sub: case BinOp::Mul: case BinOp::Div: case BinOp::Mod:
                    return Type::Int;
                default:
                    return Type::Bool;
            }
        }
        return Type::Int;
    }

    void assign(const std::string& target, const Rhs& r, std::optional<Type> declared, const Stmt& st) {
        auto pv = stmt_prov(st);
        if (auto* e = std::get_if<ExprPtr>(&r)) {
            emit_wf(*e, pv);
            auto value = ssa(*e);
            Type t = declared ? *declared : (src_types_.count(target) ? src_types_[target] : type_of(*e));
            auto n = fresh(target, t);
            assume_eq(n, value, pv);
            return;
        }
        auto& call = std::get<Call>(r);
        const Method* callee = prog_.find(call.callee);
        if (!callee) throw UnsupportedConstruct("call to unknown method " + call.callee, st.span);
        std::map<std::string, ExprPtr> sub;
        for (size_t i = 0; i < call.args.size(); ++i) {
            emit_wf(call.args[i], pv);
            sub[callee->params[i].name] = ssa(call.args[i]);
        }
        for (auto& c : callee->requires_) {
            int grp = group_++;
            for (auto& part : conjuncts(c.expr)) {
                PassiveStmt s;
                s.op = PassiveStmt::Op::Assert;
                s.formula = substitute(part, sub);
                s.prov = pv;
                s.kind = VcKind::IntermediateAssert;
                s.call_pre = true;
                s.group = grp;
                emit(s);
            }
        }
        auto n = fresh(target, callee->returns[0].type);
        sub[callee->returns[0].name] = mk_var(n);
        for (auto& c : callee->ensures) {
            PassiveStmt s;
            s.op = PassiveStmt::Op::Assume;
            s.formula = substitute(c.expr, sub);
            s.prov = clause_prov(c, "ensures", callee->name);
            emit(s);
        }
    }

    void join(std::vector<std::pair<int, IncMap>> incoming) {
        std::erase_if(incoming, [](auto& x) { return x.first < 0; });
        if (incoming.empty()) {
            cur_ = -1;
            return;
        }
        if (incoming.size() == 1) {
            cur_ = incoming[0].first;
            inc_ = incoming[0].second;
            return;
        }
        int j = new_block();
        IncMap merged;
        for (auto& [v, name0] : incoming[0].second) {
            bool everywhere = true, same = true;
            for (auto& [b, mp] : incoming) {
                auto it = mp.find(v);
                if (it == mp.end()) everywhere = false;
                else if (it->second != name0) same = false;
            }
            if (!everywhere) continue;
            if (same) {
                merged[v] = name0;
                continue;
            }
            auto n = fresh_name(v);
            g_.types[n] = src_types_[v];
            merged[v] = n;
            for (auto& [b, mp] : incoming) {
                PassiveStmt s;
                s.op = PassiveStmt::Op::Assume;
                s.formula = mk_eq(mk_var(n), mk_var(mp[v]));
                s.prov = glue_prov();
                emit_in(b, s);
            }
        }
        for (auto& [b, mp] : incoming) edge(b, j);
        cur_ = j;
        inc_ = merged;
    }

    void block(const Block& b) {
        for (auto& s : b) {
            if (cur_ < 0) return;
            stmt(s);
        }
    }

    static void assigned_vars(const Block& b, std::set<std::string>& out) {
        for_each_stmt(b, [&](const Stmt& s) {
            if (auto* a = std::get_if<Assign>(&s.node)) out.insert(a->target);
        });
    }

    void branch_assume(const ExprPtr& cond, bool taken, const std::string& site, const Provenance& pv) {
        PassiveStmt s;
        s.op = PassiveStmt::Op::Assume;
        s.formula = taken ? cond : mk_not(cond);
        s.prov = pv;
        s.decision = Decision{site, taken};
        emit(s);
    }

    void stmt(const Stmt& s) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, VarDecl>) {
                    if (n.init) {
                        assign(n.name, *n.init, n.type, s);
                    } else {
                        fresh(n.name, n.type ? *n.type : Type::Int);
                    }
                } else if constexpr (std::is_same_v<T, Assign>) {
                    assign(n.target, n.value, std::nullopt, s);
                } else if constexpr (std::is_same_v<T, Assert>) {
                    auto pv = stmt_prov(s);
                    emit_wf(n.expr, pv);
                    int grp = group_++;
                    for (auto& part : conjuncts(n.expr)) {
                        PassiveStmt a;
                        a.op = PassiveStmt::Op::Assert;
                        a.formula = ssa(part);
                        a.prov = pv;
                        a.kind = VcKind::IntermediateAssert;
                        a.group = grp;
                        emit(a);
                    }
                } else if constexpr (std::is_same_v<T, Assume>) {
                    auto pv = stmt_prov(s);
                    emit_wf(n.expr, pv);
                    PassiveStmt a;
                    a.op = PassiveStmt::Op::Assume;
                    a.formula = ssa(n.expr);
                    a.prov = pv;
                    emit(a);
                } else if constexpr (std::is_same_v<T, If>) {
                    if_stmt(s, n);
                } else if constexpr (std::is_same_v<T, While>) {
                    loop(s, nullptr, n.guard, n.invariants, n.body);
                } else if constexpr (std::is_same_v<T, For>) {
                    loop(s, &n, nullptr, n.invariants, n.body);
                } else if constexpr (std::is_same_v<T, Break>) {
                    if (breaks_.empty()) throw UnsupportedConstruct("break outside loop", s.span);
                    breaks_.back().push_back({cur_, inc_});
                    cur_ = -1;
                }
            },
            s.node);
    }

    void if_stmt(const Stmt& s, const If& n) {
        auto pv = stmt_prov(s);
        emit_wf(n.cond, pv);
        auto cond = ssa(n.cond);
        std::string site = m_.name + "/if/" + normal_key(n.cond);
        int from = cur_;
        IncMap before = inc_;
        int tb = new_block(), eb = new_block();
        edge(from, tb);
        edge(from, eb);
        cur_ = tb;
        branch_assume(cond, true, site, pv);
        block(n.then_block);
        std::pair<int, IncMap> then_out{cur_, inc_};
        cur_ = eb;
        inc_ = before;
        branch_assume(cond, false, site, pv);
        if (n.else_block) block(*n.else_block);
        std::pair<int, IncMap> else_out{cur_, inc_};
        join({then_out, else_out});
    }

    void loop(const Stmt& s, const For* f, ExprPtr guard_src, const std::vector<Clause>& invs, const Block& body) {
        auto pv = stmt_prov(s);
        struct Inv {
            ExprPtr src;
            Provenance prov;
        };
        std::vector<Inv> all;
        ExprPtr hi_ssa;
        if (f) {
            emit_wf(f->lo, pv);
            emit_wf(f->hi, pv);
            auto lo = ssa(f->lo);
            hi_ssa = ssa(f->hi);
            auto n = fresh(f->var, Type::Int);
            assume_eq(n, lo, pv);
            // bounds of the loop index, stated over the entry values
            auto implicit = mk_chain({f->lo, mk_var(f->var), f->hi}, {BinOp::Le, BinOp::Le});
            Provenance ip = pv;
            ip.text = pv.text + " (index bounds)";
            all.push_back({implicit, ip});
        }
        for (auto& c : invs) all.push_back({c.expr, clause_prov(c, "invariant")});
        IncMap entry_inc = inc_;
        auto inv_ssa = [&](const Inv& iv) {
            if (f && &iv == &all[0]) {
                std::map<std::string, ExprPtr> sub;
                for (auto& v : free_vars(*iv.src))
                    if (v != f->var && entry_inc.count(v)) sub[v] = mk_var(entry_inc[v]);
                sub[f->var] = mk_var(inc_[f->var]);
                return substitute(iv.src, sub);
            }
            return ssa(iv.src);
        };
        auto assert_invs = [&](VcKind kind) {
            for (auto& iv : all) {
                int grp = group_++;
                for (auto& part : conjuncts(inv_ssa(iv))) {
                    PassiveStmt a;
                    a.op = PassiveStmt::Op::Assert;
                    a.formula = part;
                    a.prov = iv.prov;
                    a.kind = kind;
                    a.group = grp;
                    emit(a);
                }
            }
        };
        assert_invs(VcKind::InvariantEntry);
        std::set<std::string> modified;
        assigned_vars(body, modified);
        if (f) modified.insert(f->var);
        int pre = cur_;
        for (auto& v : modified)
            if (inc_.count(v)) fresh(v, src_types_[v]);
        int head = new_block();
        edge(pre, head);
        cur_ = head;
        for (auto& iv : all) {
            emit_wf(iv.src, iv.prov);
            PassiveStmt a;
            a.op = PassiveStmt::Op::Assume;
            a.formula = inv_ssa(iv);
            a.prov = iv.prov;
            emit(a);
        }
        ExprPtr guard;
        std::string site;
        if (f) {
            guard = mk_bin(BinOp::Lt, mk_var(inc_[f->var]), hi_ssa);
            site = m_.name + "/loop/" + normal_key(mk_bin(BinOp::Lt, mk_var(f->var), f->hi));
        } else {
            emit_wf(guard_src, pv);
            guard = ssa(guard_src);
            site = m_.name + "/loop/" + normal_key(guard_src);
        }
        IncMap head_inc = inc_;
        int bb = new_block(), xb = new_block();
        edge(head, bb);
        edge(head, xb);
        cur_ = bb;
        branch_assume(guard, true, site, pv);
        breaks_.emplace_back();
        block(body);
        auto brk = std::move(breaks_.back());
        breaks_.pop_back();
        if (cur_ >= 0) {
            if (f) {
                auto prev = inc_[f->var];
                auto n = fresh(f->var, Type::Int);
                assume_eq(n, mk_bin(BinOp::Add, mk_var(prev), mk_int(1)), pv);
            }
            assert_invs(VcKind::InvariantMaintain);
            PassiveStmt stop;
            stop.op = PassiveStmt::Op::Assume;
            stop.formula = mk_bool(false);
            stop.prov = glue_prov();
            emit(stop);
        }
        cur_ = xb;
        inc_ = head_inc;
        branch_assume(guard, false, site, pv);
        std::vector<std::pair<int, IncMap>> outs{{cur_, inc_}};
        for (auto& b : brk) outs.push_back(b);
        join(outs);
    }
};

std::string target_key(const PassiveStmt& t) {
    if (t.wf) return t.wf_site;
    return t.prov.node_key + "|" + normal_key(strip_ssa(t.formula));
}

VcPartition make_partition(const std::string& method, std::vector<PassiveStmt> path, const PassiveStmt& target,
                           const VarTypes& types, int body_line) {
    VcPartition p;
    p.method = method;
    p.kind = target.kind;
    p.target = target;
    for (auto& s : path)
        if (s.decision) p.decisions.push_back(s.decision->site + (s.decision->taken ? "=T" : "=F"));
    p.path = std::move(path);
    p.vc = implication_chain(p.antecedents(), target.formula);
    for (auto& v : free_vars(*p.vc)) {
        auto it = types.find(v);
        if (it != types.end()) p.types[v] = it->second;
    }
    std::string sig;
    for (auto& d : p.decisions) sig += d + ";";
    p.anchor = std::string(to_string(p.kind)) + "|" + target_key(target) + "|" + sig;
    p.related_line = target.prov.line;
    p.error_line = target.kind == VcKind::Postcondition ? body_line : target.prov.line;
    return p;
}

void signature_wf(const Method& m, std::vector<VcPartition>& out) {
    VarTypes types;
    for (auto& p : m.params) types[p.name] = p.type;
    for (auto& r : m.returns) types[r.name] = r.type;
    int skolem = 0;
    auto prov_of = [&](const Clause& c, const char* kind) {
        Provenance p;
        p.node = c.id;
        p.line = c.span.begin.line;
        p.role = NodeRole::SpecClause;
        p.trusted = c.trust.trusted;
        p.clause_kind = kind;
        p.method = m.name;
        p.text = std::string(kind) + " " + print_expr(c.expr);
        p.node_key = node_key(m.name, kind, normal_key(c.expr));
        return p;
    };
    int uid = 100000;
    auto run = [&](const Clause& c, const char* kind, const std::vector<const Clause*>& pre) {
        auto pv = prov_of(c, kind);
        for (auto& ob : wf_obligations(c.expr)) {
            std::vector<PassiveStmt> path;
            for (auto* q : pre) {
                PassiveStmt a;
                a.op = PassiveStmt::Op::Assume;
                a.formula = q->expr;
                a.prov = prov_of(*q, "requires");
                a.uid = uid++;
                path.push_back(a);
            }
            std::map<std::string, ExprPtr> sub;
            VarTypes tys = types;
            for (auto& fr : ob.frames) {
                if (!fr.var.empty()) {
                    auto sk = fr.var + "#" + std::to_string(skolem++);
                    sub[fr.var] = mk_var(sk);
                    tys[sk] = Type::Int;
                    continue;
                }
                PassiveStmt a;
                a.op = PassiveStmt::Op::Assume;
                a.formula = substitute(fr.guard, sub);
                a.prov = pv;
                a.uid = uid++;
                path.push_back(a);
            }
            PassiveStmt t;
            t.op = PassiveStmt::Op::Assert;
            t.formula = substitute(ob.bound, sub);
            t.prov = pv;
            t.kind = VcKind::SignatureWf;
            t.wf = true;
            t.wf_site = m.name + "/" + kind + "/" + print_expr(ob.site);
            t.wf_what = ob.what;
            t.uid = uid++;
            out.push_back(make_partition(m.name, std::move(path), t, tys, m.body_line));
        }
    };
    std::vector<const Clause*> pre;
    for (auto& c : m.requires_) {
        run(c, "requires", pre);
        pre.push_back(&c);
    }
    for (auto& c : m.ensures) run(c, "ensures", pre);
}

std::uint64_t count_paths(const PassiveGraph& g, int b, std::map<int, std::uint64_t>& memo,
                          const std::map<std::string, int>& idx) {
    auto it = memo.find(b);
    if (it != memo.end()) return it->second;
    std::uint64_t n = 0;
    if (g.blocks[b].successors.empty()) n = 1;
    for (auto& s : g.blocks[b].successors) n += count_paths(g, idx.at(s), memo, idx);
    memo[b] = n;
    return n;
}

}  // namespace

std::vector<WfObligation> wf_obligations(const ExprPtr& e) {
    std::vector<WfFrame> ctx;
    std::vector<WfObligation> out;
    wf_rec(e, ctx, out);
    return out;
}

std::vector<std::string> wf_sites(const Program& p) {
    std::vector<std::string> out;
    auto add = [&](const std::string& method, const std::string& kind, const ExprPtr& e) {
        for (auto& ob : wf_obligations(e)) out.push_back(method + "/" + kind + "/" + print_expr(ob.site));
    };
    for (auto& m : p.methods) {
        for (auto& c : m.requires_) add(m.name, "requires", c.expr);
        for (auto& c : m.ensures) add(m.name, "ensures", c.expr);
        if (!m.body) continue;
        for_each_stmt(*m.body, [&](const Stmt& s) {
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    auto rhs = [&](const Rhs& r) {
                        if (auto* e = std::get_if<ExprPtr>(&r)) add(m.name, "stmt", *e);
                        else
                            for (auto& a : std::get<Call>(r).args) add(m.name, "stmt", a);
                    };
                    if constexpr (std::is_same_v<T, VarDecl>) {
                        if (n.init) rhs(*n.init);
                    } else if constexpr (std::is_same_v<T, Assign>) {
                        rhs(n.value);
                    } else if constexpr (std::is_same_v<T, Assert> || std::is_same_v<T, Assume>) {
                        add(m.name, "stmt", n.expr);
                    } else if constexpr (std::is_same_v<T, If>) {
                        add(m.name, "stmt", n.cond);
                    } else if constexpr (std::is_same_v<T, While>) {
                        add(m.name, "stmt", n.guard);
                        for (auto& c : n.invariants) add(m.name, "invariant", c.expr);
                    } else if constexpr (std::is_same_v<T, For>) {
                        add(m.name, "stmt", n.lo);
                        add(m.name, "stmt", n.hi);
                        for (auto& c : n.invariants) add(m.name, "invariant", c.expr);
                    }
                },
                s.node);
        });
    }
    return out;
}

std::set<std::string> node_keys(const Program& p) {
    std::set<std::string> out;
    for (auto& m : p.methods) {
        for (auto& c : m.requires_) out.insert(node_key(m.name, "requires", normal_key(c.expr)));
        for (auto& c : m.ensures) out.insert(node_key(m.name, "ensures", normal_key(c.expr)));
        if (!m.body) continue;
        for_each_stmt(*m.body, [&](const Stmt& s) {
            out.insert(node_key(m.name, "stmt", stmt_text(s)));
            auto invs = [&](const std::vector<Clause>& cs) {
                for (auto& c : cs) out.insert(node_key(m.name, "invariant", normal_key(c.expr)));
            };
            if (auto* w = std::get_if<While>(&s.node)) invs(w->invariants);
            if (auto* f = std::get_if<For>(&s.node)) invs(f->invariants);
        });
    }
    return out;
}

PassiveGraph passify(const Method& m, const Program& p) {
    if (!m.body) {
        PassiveGraph g;
        g.method = m.name;
        return g;
    }
    Builder b(m, p);
    return b.run();
}

std::string dump(const PassiveGraph& g) {
    std::ostringstream os;
    for (auto& b : g.blocks) {
        os << b.id << ":\n";
        for (auto& s : b.stmts) {
            switch (s.op) {
                case PassiveStmt::Op::Skip: os << "  skip;\n"; break;
                case PassiveStmt::Op::Assume: os << "  assume " << print_expr(s.formula) << ";\n"; break;
                case PassiveStmt::Op::Assert: os << "  assert " << print_expr(s.formula) << ";\n"; break;
            }
        }
        os << "  goto";
        for (auto& s : b.successors) os << ' ' << s;
        os << ";\n";
    }
    return os.str();
}

std::vector<VcPartition> vc_gen_method(const Method& m, const Program& p) {
    std::vector<VcPartition> out;
    signature_wf(m, out);
    if (m.body) {
        auto g = passify(m, p);
        std::map<std::string, int> idx;
        for (size_t i = 0; i < g.blocks.size(); ++i) idx[g.blocks[i].id] = static_cast<int>(i);
        std::map<int, std::uint64_t> memo;
        auto n = count_paths(g, 0, memo, idx);
        if (n > static_cast<std::uint64_t>(kMaxPaths))
            throw PathExplosion("method " + m.name + " has " + std::to_string(n) + " paths (limit " +
                                std::to_string(kMaxPaths) + ")");
        std::set<std::pair<std::string, int>> seen;
        std::vector<PassiveStmt> prefix;
        std::string trail;
        std::function<void(int)> dfs = [&](int b) {
            auto saved_trail = trail;
            size_t saved = prefix.size();
            trail += g.blocks[b].id + ",";
            for (auto& s : g.blocks[b].stmts) {
                if (s.op == PassiveStmt::Op::Skip) continue;
                if (s.op == PassiveStmt::Op::Assert && seen.insert({trail, s.uid}).second) {
                    std::vector<PassiveStmt> path;
                    for (auto& q : prefix)
                        if (!(q.op == PassiveStmt::Op::Assert && q.group == s.group)) path.push_back(q);
                    out.push_back(make_partition(m.name, std::move(path), s, g.types, m.body_line));
                }
                prefix.push_back(s);
            }
            for (auto& succ : g.blocks[b].successors) dfs(idx.at(succ));
            prefix.resize(saved);
            trail = saved_trail;
        };
        if (!g.blocks.empty()) dfs(0);
    }
    return out;
}

std::vector<VcPartition> vc_gen(const Program& p) {
    std::vector<VcPartition> out;
    for (auto& m : p.methods) {
        auto part = vc_gen_method(m, p);
        int k = 0;
        for (auto& x : part) {
            x.partition_id = m.name + "#" + std::to_string(k++);
            out.push_back(std::move(x));
        }
    }
    return out;
}

FailingTrace trace_of(const VcPartition& part) {
    FailingTrace t;
    t.partition_id = part.partition_id;
    t.kind = part.kind;
    t.failing = part.target.formula;
    t.error_line = part.error_line;
    t.related_line = part.related_line;
    auto push = [&](const PassiveStmt& s) {
        if (!s.prov.node.valid()) return;
        if (!t.steps.empty() && t.steps.back().id == s.prov.node) return;
        t.steps.push_back({s.prov.node, s.prov.line, s.prov.role, s.prov.text});
    };
    for (auto& s : part.path) push(s);
    push(part.target);
    if (part.target.wf) t.message = part.target.wf_what + ".";
    else switch (part.kind) {
        case VcKind::Postcondition: t.message = "A postcondition might not hold on this path."; break;
        case VcKind::InvariantEntry: t.message = "This loop invariant might not hold on entry."; break;
        case VcKind::InvariantMaintain: t.message = "This loop invariant might not be maintained by the loop."; break;
        default:
            t.message = part.target.call_pre ? "A precondition for this call might not hold."
                                             : "assertion might not hold.";
    }
    return t;
}

}  // namespace coevo
