#include <algorithm>
#include <functional>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/quant.hpp"
#include "coevo/synthesis.hpp"

namespace coevo {

namespace {

const TrustTag kPatched{true, TrustOrigin::Patched};

void each_stmt(Block& b, const std::function<void(Stmt&)>& f) {
    for (auto& s : b) {
        f(s);
        if (auto* i = std::get_if<If>(&s.node)) {
            each_stmt(i->then_block, f);
            if (i->else_block) each_stmt(*i->else_block, f);
        } else if (auto* w = std::get_if<While>(&s.node)) {
            each_stmt(w->body, f);
        } else if (auto* l = std::get_if<For>(&s.node)) {
            each_stmt(l->body, f);
        }
    }
}

void each_invariant(Method& m, const std::function<void(Clause&)>& f) {
    if (!m.body) return;
    each_stmt(*m.body, [&](Stmt& s) {
        if (auto* w = std::get_if<While>(&s.node))
            for (auto& c : w->invariants) f(c);
        if (auto* l = std::get_if<For>(&s.node))
            for (auto& c : l->invariants) f(c);
    });
}

std::optional<std::int64_t> literal(const ExprPtr& e) {
    if (auto* k = std::get_if<IntLit>(&e->node)) return k->value;
    if (auto* u = std::get_if<Unary>(&e->node); u && u->op == UnOp::Neg)
        if (auto* k = std::get_if<IntLit>(&u->operand->node)) return -k->value;
    return std::nullopt;
}

// v == c or c == v
bool pins(const ExprPtr& e, const std::string& v, std::int64_t c) {
    auto* b = std::get_if<Binary>(&e->node);
    if (!b || b->op != BinOp::Eq) return false;
    auto side = [&](const ExprPtr& l, const ExprPtr& r) {
        auto* x = std::get_if<VarRef>(&l->node);
        auto k = literal(r);
        return x && x->name == v && k && *k == c;
    };
    return side(b->lhs, b->rhs) || side(b->rhs, b->lhs);
}

ExprPtr replace_pin(const ExprPtr& e, const std::string& v, std::int64_t c, const ExprPtr& repl) {
    return rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (pins(x, v, c)) return mk_eq(mk_var(v), repl);
        return nullptr;
    });
}

std::vector<std::int64_t> domain_order(const BoundedDomain& d) {
    std::vector<std::int64_t> xs;
    std::int64_t m = std::max(std::abs(d.int_lo), std::abs(d.int_hi));
    for (std::int64_t k = 0; k <= m; ++k) {
        if (k == 0) {
            if (d.int_lo <= 0 && 0 <= d.int_hi) xs.push_back(0);
            continue;
        }
        if (k <= d.int_hi) xs.push_back(k);
        if (-k >= d.int_lo) xs.push_back(-k);
    }
    return xs;
}

std::string fresh_var(const Method& m, const std::string& base) {
    std::set<std::string> used;
    for (auto& p : m.params) used.insert(p.name);
    for (auto& r : m.returns) used.insert(r.name);
    for (auto cand : {base, std::string("j"), std::string("k"), std::string("n")})
        if (!used.count(cand)) return cand;
    return base + "0";
}

struct Candidate {
    Program prog;
    std::string description;
};

class Generator {
public:
    Generator(const SynthRequest& req, Solver& solver) : req_(req), solver_(solver), prog_(*req.ast) {
        if (req.report) hard_ = hard_nodes(*req.report);
        if (req.report)
            if (auto* part = req.report->partition(req.trace.partition_id)) {
                anchor_ = part->anchor;
                target_ = part->target;
                method_ = part->method;
            }
    }

    std::vector<Candidate> run() {
        guard_weakening();
        invariant_guards();
        constant_replacement();
        retargeting();
        spec_strengthening();
        clause_deletion();
        return std::move(out_);
    }

private:
    const SynthRequest& req_;
    Solver& solver_;
    const Program& prog_;
    std::set<StmtId> hard_;
    std::string anchor_;
    PassiveStmt target_;
    std::string method_;
    std::vector<Candidate> out_;

    bool frozen(StmtId id, const TrustTag& t) const { return t.trusted || hard_.count(id); }

    Method* method_of(Program& p, const std::string& name) {
        for (auto& m : p.methods)
            if (m.name == name) return &m;
        return nullptr;
    }

    void emit(Program p, std::string desc) { out_.push_back({std::move(p), std::move(desc)}); }

    // clause ids worth touching first: the failing one, then the prioritized ones
    std::vector<StmtId> focus() const {
        std::vector<StmtId> ids;
        auto add = [&](StmtId id) {
            if (id.valid() && std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        };
        if (target_.prov.role == NodeRole::SpecClause) add(target_.prov.node);
        for (auto& f : req_.top)
            if (f.prov.role == NodeRole::SpecClause) add(f.prov.node);
        return ids;
    }

    struct ClauseRef {
        std::string method;
        bool ensures;
        size_t index;
    };

    std::optional<ClauseRef> find_clause(StmtId id) const {
        for (auto& m : prog_.methods) {
            for (size_t i = 0; i < m.requires_.size(); ++i)
                if (m.requires_[i].id == id) return ClauseRef{m.name, false, i};
            for (size_t i = 0; i < m.ensures.size(); ++i)
                if (m.ensures[i].id == id) return ClauseRef{m.name, true, i};
        }
        return std::nullopt;
    }

    void guard_weakening() {
        for (auto id : focus()) {
            auto ref = find_clause(id);
            if (!ref) continue;
            const Method& m = *prog_.find(ref->method);
            const Clause& c = ref->ensures ? m.ensures[ref->index] : m.requires_[ref->index];
            if (frozen(c.id, c.trust)) continue;
            std::set<std::string> allowed;
            for (auto& p : m.params) allowed.insert(p.name);
            if (ref->ensures)
                for (auto& r : m.returns) allowed.insert(r.name);
            std::vector<ExprPtr> guards;
            auto add_guard = [&](ExprPtr g) {
                for (auto& v : free_vars(*g))
                    if (!allowed.count(v)) return;
                for (auto& h : guards)
                    if (normal_key(h) == normal_key(g)) return;
                guards.push_back(g);
            };
            auto spec_clauses = ref->ensures ? std::vector<const std::vector<Clause>*>{&m.requires_, &m.ensures}
                                             : std::vector<const std::vector<Clause>*>{&m.requires_};
            for (auto* cs : spec_clauses)
                for (auto& d : *cs) {
                    std::vector<ExprPtr> acc;
                    collect_accesses(d.expr, acc, false);
                    for (auto& a : acc) {
                        auto& ix = std::get<Index>(a->node);
                        add_guard(bounds_of(ix.array, ix.index));
                    }
                }
            visit(c.expr, [&](const ExprPtr& e) {
                auto* q = std::get_if<Quantifier>(&e->node);
                if (!q) return;
                auto range = quant_range(*q);
                if (!range) return;
                std::vector<ExprPtr> acc;
                collect_accesses(q->body, acc, true);
                for (auto& a : acc) {
                    auto& ix = std::get<Index>(a->node);
                    if (auto* v = std::get_if<VarRef>(&ix.index->node); v && v->name == q->var)
                        add_guard(mk_bin(BinOp::Le, range->hi, mk_len(ix.array)));
                }
            });
            std::string existing;
            if (auto* b = std::get_if<Binary>(&c.expr->node); b && b->op == BinOp::Implies)
                existing = normal_key(b->lhs);
            for (auto& g : guards) {
                if (normal_key(g) == existing) continue;
                Program p = prog_;
                Method& pm = *method_of(p, ref->method);
                Clause& pc = ref->ensures ? pm.ensures[ref->index] : pm.requires_[ref->index];
                pc.expr = mk_implies(g, c.expr);
                pc.trust = kPatched;
                emit(std::move(p), "guard " + print_expr(c.expr) + " with " + print_expr(g));
            }
        }
    }

    std::vector<std::string> bool_locals(const Method& m) const {
        std::vector<std::string> out;
        if (!m.body) return out;
        for_each_stmt(*m.body, [&](const Stmt& s) {
            auto* d = std::get_if<VarDecl>(&s.node);
            if (!d) return;
            bool is_bool = d->type && *d->type == Type::Bool;
            if (d->init)
                if (auto* e = std::get_if<ExprPtr>(&*d->init)) is_bool = is_bool || std::holds_alternative<BoolLit>((*e)->node);
            if (is_bool) out.push_back(d->name);
        });
        return out;
    }

    void invariant_guards() {
        const Method* m = prog_.find(method_);
        if (!m) return;
        auto locals = bool_locals(*m);
        std::vector<std::pair<StmtId, ExprPtr>> invs;
        Program scan = prog_;
        each_invariant(*method_of(scan, method_), [&](Clause& c) {
            if (!frozen(c.id, c.trust)) invs.push_back({c.id, c.expr});
        });
        for (auto& [id, e] : invs) {
            if (auto* b = std::get_if<Binary>(&e->node); b && b->op == BinOp::Implies) continue;
            for (auto& l : locals)
                for (bool neg : {false, true}) {
                    ExprPtr g = neg ? mk_not(mk_var(l)) : mk_var(l);
                    Program p = prog_;
                    each_invariant(*method_of(p, method_), [&](Clause& c) {
                        if (c.id != id) return;
                        c.expr = mk_implies(g, e);
                        c.trust = kPatched;
                    });
                    emit(std::move(p), "guard invariant " + print_expr(e) + " with " + print_expr(g));
                }
        }
    }

    struct LiteralAssign {
        StmtId id;
        std::string var;
        std::optional<std::int64_t> value;
    };

    static bool int_valued(const ExprPtr& e, const std::set<std::string>& ints) {
        if (literal(e)) return true;
        if (auto* v = std::get_if<VarRef>(&e->node)) return ints.count(v->name) > 0;
        if (std::holds_alternative<Length>(e->node) || std::holds_alternative<Index>(e->node)) return true;
        if (auto* u = std::get_if<Unary>(&e->node)) return u->op == UnOp::Neg;
        if (auto* b = std::get_if<Binary>(&e->node))
            return b->op == BinOp::Add || b->op == BinOp::Sub || b->op == BinOp::Mul || b->op == BinOp::Div ||
                   b->op == BinOp::Mod;
        return false;
    }

    // int assignments; value is set when the rhs is a literal
    std::vector<LiteralAssign> int_assigns(const Method& m) const {
        std::vector<LiteralAssign> out;
        if (!m.body) return out;
        std::set<std::string> ints;
        for (auto& p : m.params)
            if (p.type == Type::Int) ints.insert(p.name);
        for (auto& p : m.returns)
            if (p.type == Type::Int) ints.insert(p.name);
        for_each_stmt(*m.body, [&](const Stmt& s) {
            if (auto* d = std::get_if<VarDecl>(&s.node)) {
                bool is_int = d->type && *d->type == Type::Int;
                if (d->init)
                    if (auto* e = std::get_if<ExprPtr>(&*d->init)) is_int = is_int || int_valued(*e, ints);
                if (is_int) ints.insert(d->name);
            }
            if (auto* f = std::get_if<For>(&s.node)) ints.insert(f->var);
        });
        for_each_stmt(*m.body, [&](const Stmt& s) {
            if (frozen(s.id, s.trust)) return;
            const Rhs* r = nullptr;
            std::string v;
            if (auto* d = std::get_if<VarDecl>(&s.node); d && d->init) {
                r = &*d->init;
                v = d->name;
            } else if (auto* a = std::get_if<Assign>(&s.node)) {
                r = &a->value;
                v = a->target;
            }
            if (!r) return;
            auto* e = std::get_if<ExprPtr>(r);
            if (!e) return;
            if (ints.count(v) && int_valued(*e, ints)) out.push_back({s.id, v, literal(*e)});
        });
        return out;
    }

    std::vector<LiteralAssign> literal_assigns(const Method& m) const {
        std::vector<LiteralAssign> out;
        for (auto& la : int_assigns(m))
            if (la.value) out.push_back(la);
        return out;
    }

    // sets the rhs of one assignment and rewrites invariants pinning the old constant
    Program reassign(const LiteralAssign& la, const ExprPtr& value) {
        Program p = prog_;
        Method& m = *method_of(p, method_);
        each_stmt(*m.body, [&](Stmt& s) {
            if (s.id != la.id) return;
            if (auto* d = std::get_if<VarDecl>(&s.node)) d->init = Rhs{value};
            if (auto* a = std::get_if<Assign>(&s.node)) a->value = Rhs{value};
            s.trust = kPatched;
        });
        each_invariant(m, [&](Clause& c) {
            if (frozen(c.id, c.trust) || !la.value) return;
            auto e = replace_pin(c.expr, la.var, *la.value, value);
            if (normal_key(e) == normal_key(c.expr)) return;
            c.expr = e;
            c.trust = kPatched;
        });
        return p;
    }

    void constant_replacement() {
        const Method* m = prog_.find(method_);
        if (!m) return;
        for (auto& la : int_assigns(*m))
            for (auto v : domain_order(solver_.config().domain)) {
                if (v == la.value) continue;
                emit(reassign(la, mk_int(v)), la.var + " := " + std::to_string(v));
            }
    }

    void retargeting() {
        const Method* m = prog_.find(method_);
        if (!m || !target_.formula) return;
        ExprPtr t = strip_ssa(target_.formula);
        while (auto* b = std::get_if<Binary>(&t->node)) {
            if (b->op != BinOp::Implies) break;
            t = b->rhs;
        }
        auto* eq = std::get_if<Binary>(&t->node);
        if (!eq || eq->op != BinOp::Eq) return;
        for (int side = 0; side < 2; ++side) {
            auto* v = std::get_if<VarRef>(&(side ? eq->rhs : eq->lhs)->node);
            auto value = side ? eq->lhs : eq->rhs;
            if (!v || free_vars(*value).count(v->name) || literal(value)) continue;
            for (auto& la : literal_assigns(*m)) {
                if (la.var != v->name) continue;
                emit(reassign(la, value), la.var + " := " + print_expr(value));
            }
        }
    }

    void spec_strengthening() {
        if (target_.kind != VcKind::Postcondition) return;
        const Method* w = prog_.find(method_);
        if (!w || !w->body) return;
        const Call* call = nullptr;
        std::string result;
        for_each_stmt(*w->body, [&](const Stmt& s) {
            if (auto* a = std::get_if<Assign>(&s.node))
                if (auto* c = std::get_if<Call>(&a->value)) {
                    call = c;
                    result = a->target;
                }
            if (auto* d = std::get_if<VarDecl>(&s.node); d && d->init)
                if (auto* c = std::get_if<Call>(&*d->init)) {
                    call = c;
                    result = d->name;
                }
        });
        if (!call) return;
        const Method* stub = prog_.find(call->callee);
        if (!stub || stub->returns.size() != 1) return;
        std::map<std::string, ExprPtr> ren;
        ren[result] = mk_var(stub->returns[0].name);
        for (size_t i = 0; i < call->args.size(); ++i)
            if (auto* v = std::get_if<VarRef>(&call->args[i]->node)) ren[v->name] = mk_var(stub->params[i].name);
        ExprPtr oracle = substitute(strip_ssa(target_.formula), ren);
        std::set<std::string> allowed;
        for (auto& p : stub->params) allowed.insert(p.name);
        for (auto& r : stub->returns) allowed.insert(r.name);
        for (auto& v : free_vars(*oracle))
            if (!allowed.count(v)) return;
        // the test input, read from the wrapper's requires
        Env input;
        for (auto& c : w->requires_)
            for (auto& part : conjuncts(c.expr)) {
                auto* b = std::get_if<Binary>(&part->node);
                if (!b || b->op != BinOp::Eq) continue;
                auto* v = std::get_if<VarRef>(&b->lhs->node);
                if (!v || !ren.count(v->name)) continue;
                try {
                    input[std::get<VarRef>(ren[v->name]->node).name] = eval_value(*b->rhs, {});
                } catch (const EvalError&) {
                }
            }
        auto iv = fresh_var(*stub, "i");
        std::vector<ExprPtr> guards;
        auto add_guard = [&](const ExprPtr& g) {
            for (auto& h : guards)
                if (normal_key(h) == normal_key(g)) return;
            try {
                if (!evaluate(*g, input)) return;
            } catch (const EvalError&) {
                return;
            }
            guards.push_back(g);
        };
        auto add_pred = [&](const ExprPtr& arr, const ExprPtr& pred) {
            auto range = mk_chain({mk_int(0), mk_var(iv), mk_len(arr)}, {BinOp::Le, BinOp::Lt});
            add_guard(mk_quant(QuantKind::Forall, iv, mk_implies(range, pred)));
            add_guard(mk_quant(QuantKind::Exists, iv, mk_and(range, pred)));
        };
        for (auto& c : stub->ensures) {
            visit(c.expr, [&](const ExprPtr& e) {
                auto* b = std::get_if<Binary>(&e->node);
                if (!b || !is_comparison(b->op)) return;
                std::vector<ExprPtr> acc;
                collect_accesses(e, acc, true);
                for (auto& a : acc) {
                    auto& ix = std::get<Index>(a->node);
                    auto* v = std::get_if<VarRef>(&ix.index->node);
                    auto* arr = std::get_if<VarRef>(&ix.array->node);
                    if (!v || !arr || !allowed.count(arr->name)) continue;
                    auto pred = substitute(e, {{v->name, mk_var(iv)}});
                    bool closed = true;
                    for (auto& fv : free_vars(*pred))
                        if (fv != iv && !allowed.count(fv)) closed = false;
                    if (closed) add_pred(ix.array, pred);
                }
            });
        }
        std::vector<ExprPtr> clauses;
        for (auto& g : guards) clauses.push_back(mk_implies(g, oracle));
        clauses.push_back(oracle);
        for (auto& e : clauses) {
            bool dup = false;
            for (auto& c : stub->ensures)
                if (normal_key(c.expr) == normal_key(e)) dup = true;
            if (dup) continue;
            Program p = prog_;
            Method& s = *method_of(p, stub->name);
            Clause c;
            c.expr = e;
            c.trust = kPatched;
            c.id = StmtId{1 << 20};
            s.ensures.push_back(c);
            emit(std::move(p), "add to " + stub->name + ": ensures " + print_expr(e));
        }
    }

    void clause_deletion() {
        std::vector<StmtId> order = focus();
        for (auto& m : prog_.methods) {
            if (m.name != method_) continue;
            for (auto& c : m.ensures) order.push_back(c.id);
            for (auto& c : m.requires_) order.push_back(c.id);
        }
        std::set<StmtId> done;
        for (auto id : order) {
            if (!done.insert(id).second) continue;
            auto ref = find_clause(id);
            if (!ref) continue;
            const Method& m = *prog_.find(ref->method);
            const Clause& c = ref->ensures ? m.ensures[ref->index] : m.requires_[ref->index];
            if (frozen(c.id, c.trust)) continue;
            Program p = prog_;
            Method& pm = *method_of(p, ref->method);
            auto& vec = ref->ensures ? pm.ensures : pm.requires_;
            vec.erase(vec.begin() + static_cast<long>(ref->index));
            emit(std::move(p), "delete " + print_expr(c.expr));
        }
        const Method* m = prog_.find(method_);
        if (!m) return;
        std::vector<StmtId> invs;
        Program scan = prog_;
        each_invariant(*method_of(scan, method_), [&](Clause& c) {
            if (!frozen(c.id, c.trust)) invs.push_back(c.id);
        });
        for (auto id : invs) {
            Program p = prog_;
            std::string text;
            each_stmt(*method_of(p, method_)->body, [&](Stmt& s) {
                auto drop = [&](std::vector<Clause>& cs) {
                    for (size_t i = 0; i < cs.size(); ++i)
                        if (cs[i].id == id) {
                            text = print_expr(cs[i].expr);
                            cs.erase(cs.begin() + static_cast<long>(i));
                            return;
                        }
                };
                if (auto* w = std::get_if<While>(&s.node)) drop(w->invariants);
                if (auto* l = std::get_if<For>(&s.node)) drop(l->invariants);
            });
            emit(std::move(p), "delete invariant " + text);
        }
    }
};

}  // namespace

std::vector<Patch> EnumerativePlugin::propose(const SynthRequest& req, Solver& solver) {
    std::vector<Patch> out;
    if (!req.ast) return out;
    Generator gen(req, solver);
    auto cands = gen.run();
    std::string anchor;
    if (req.report)
        if (auto* part = req.report->partition(req.trace.partition_id)) anchor = part->anchor;
    std::set<std::string> seen{req.canonical};
    for (auto& c : cands) {
        std::string text = print_program(c.prog);
        if (!seen.insert(text).second) continue;
        Program reparsed;
        try {
            reparsed = parse_program(text, req.filename);
        } catch (const Error&) {
            continue;
        }
        // keep only candidates that get rid of the failing partition
        bool fixed = true;
        try {
            for (auto& part : vc_gen(reparsed)) {
                if (part.anchor != anchor) continue;
                if (solver.check(part.vc, part.types).status != VerdictStatus::Valid) {
                    fixed = false;
                    break;
                }
            }
        } catch (const Error&) {
            continue;
        }
        if (!fixed) continue;
        Patch p = diff_patch(req.canonical, text, req.filename);
        p.synthesizer_id = "enumerative";
        p.description = c.description;
        out.push_back(std::move(p));
        if (static_cast<int>(out.size()) >= req.k) break;
    }
    return out;
}

}  // namespace coevo
