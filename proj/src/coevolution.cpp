#include "coevo/coevolution.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace coevo {

const char* to_string(Relation r) {
    switch (r) {
        case Relation::ProgSpec: return "prog_spec";
        case Relation::ProgTest: return "prog_test";
        case Relation::SpecTest: return "spec_test";
    }
    return "?";
}

ConformanceVerdict conforms_prog_spec(const Program& p, Solver& solver) {
    ConformanceVerdict v;
    auto ver = verify(p, solver);
    v.failing_traces = std::move(ver.traces);
    v.holds = v.failing_traces.empty();
    return v;
}

namespace {

Type literal_type(const Expr& e) {
    if (std::holds_alternative<ArrayLit>(e.node)) return Type::IntArray;
    if (std::holds_alternative<BoolLit>(e.node)) return Type::Bool;
    return Type::Int;
}

// the parser assigns ids and spans; printing and reparsing is the simplest way to get them
Program reparse(const Program& p) {
    auto text = print_program(p);
    auto out = parse_program(text, p.source_name);
    return out;
}

std::map<std::string, ExprPtr> input_values(const Test& t) {
    std::map<std::string, ExprPtr> m;
    for (auto& in : t.inputs) m[in.name] = in.value;
    return m;
}

}  // namespace

Method test_to_spec(const Test& t, const Method& callee) {
    Method m;
    m.name = t.name;
    m.trust = t.trust;
    for (auto& in : t.inputs) {
        m.params.push_back({in.name, literal_type(*in.value)});
        Clause c;
        c.expr = mk_eq(mk_var(in.name), in.value);
        c.trust = t.trust;
        m.requires_.push_back(c);
    }
    Type rt = callee.returns.empty() ? Type::Int : callee.returns[0].type;
    m.returns.push_back({t.result, rt});
    for (auto& o : t.oracle) {
        Clause c;
        c.expr = o.expr;
        c.trust = o.trust;
        m.ensures.push_back(c);
    }
    Block body;
    Stmt s;
    s.trust = t.trust;
    s.node = Assign{t.result, Rhs{Call{t.callee, t.args}}};
    body.push_back(std::move(s));
    m.body = std::move(body);
    return m;
}

Test spec_to_test(const Method& w) {
    Test t;
    t.name = w.name;
    t.trust = w.trust;
    for (auto& p : w.params) {
        for (auto& c : w.requires_) {
            auto* b = std::get_if<Binary>(&c.expr->node);
            if (!b || b->op != BinOp::Eq) continue;
            auto* v = std::get_if<VarRef>(&b->lhs->node);
            if (v && v->name == p.name) t.inputs.push_back({p.name, b->rhs});
        }
    }
    if (!w.returns.empty()) t.result = w.returns[0].name;
    if (w.body)
        for (auto& s : *w.body)
            if (auto* a = std::get_if<Assign>(&s.node))
                if (auto* c = std::get_if<Call>(&a->value)) {
                    t.callee = c->callee;
                    t.args = c->args;
                }
    for (auto& c : w.ensures) t.oracle.push_back(c);
    return t;
}

Program test_as_spec_of(const Program& p, const Test& t) {
    Program out = p;
    Method* m = nullptr;
    for (auto& x : out.methods)
        if (x.name == t.callee) m = &x;
    if (!m) throw ShapeError("test " + t.name + " calls unknown method " + t.callee);
    if (m->params.size() != t.args.size()) throw ShapeError("arity mismatch in test " + t.name);
    auto inputs = input_values(t);
    std::map<std::string, ExprPtr> ren;
    std::vector<Clause> req;
    for (size_t i = 0; i < t.args.size(); ++i) {
        ExprPtr value = substitute(t.args[i], inputs);
        Clause c;
        c.expr = mk_eq(mk_var(m->params[i].name), value);
        c.trust = t.trust;
        req.push_back(c);
        if (auto* v = std::get_if<VarRef>(&t.args[i]->node)) ren[v->name] = mk_var(m->params[i].name);
    }
    if (!m->returns.empty()) ren[t.result] = mk_var(m->returns[0].name);
    std::vector<Clause> ens;
    for (auto& o : t.oracle) {
        Clause c = o;
        c.expr = substitute(o.expr, ren);
        ens.push_back(c);
    }
    m->requires_ = req;
    m->ensures = ens;
    return reparse(out);
}

ConformanceVerdict conforms_prog_test(const Program& p, const Test& t, Solver& solver) {
    auto v = conforms_prog_spec(test_as_spec_of(p, t), solver);
    v.relation = Relation::ProgTest;
    return v;
}

Method spec_to_program(const Method& m) {
    Method s = m;
    s.body.reset();
    return s;
}

namespace {

Program spec_test_unit(const Method& spec, const std::vector<Test>& tests) {
    Program u;
    u.source_name = spec.name + ".mvl";
    u.methods.push_back(spec_to_program(spec));
    for (auto& t : tests) u.methods.push_back(test_to_spec(t, spec));
    return reparse(u);
}

}  // namespace

ConformanceVerdict conforms_spec_test(const Method& spec, const Test& t, Solver& solver) {
    auto v = conforms_prog_spec(spec_test_unit(spec, {t}), solver);
    v.relation = Relation::SpecTest;
    return v;
}

namespace {

using json = nlohmann::ordered_json;

double ms_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
}

void log_event(RunState& st, const RunOptions& opts, json j) {
    if (!opts.deterministic) j["elapsed_ms"] = ms_since(st.start);
    st.log.push_back(j.dump());
}

bool out_of_time(const Budget& b, const RunState& st) {
    return std::chrono::steady_clock::now() - st.start > b.wall_clock;
}

bool exhibits(const Verification& v, const std::string& anchor) {
    for (auto& part : v.parts)
        if (part.anchor == anchor && v.statuses.at(part.partition_id) != VerdictStatus::Valid) return true;
    return false;
}

}  // namespace

CoevoResult co_evolve(const Program& p, const Budget& budget, SynthPlugin& plugin, Solver& solver,
                      const RunOptions& opts, RunState& st) {
    CoevoResult res;
    std::deque<Candidate> pool;
    std::set<std::string> seen;
    Candidate first;
    first.program = p;
    first.source = print_program(p);
    seen.insert(first.source);
    pool.push_back(std::move(first));
    while (!pool.empty()) {
        Candidate cur = std::move(pool.front());
        pool.pop_front();
        auto ver = verify(cur.program, solver);
        json ev{{"event", "candidate"}, {"campaign", cur.campaign}, {"patches", cur.lineage.size()}};
        ev["failing"] = ver.traces.size();
        log_event(st, opts, ev);
        if (ver.traces.empty()) {
            res.verified.push_back(cur);
            if (opts.first_only) return res;
            continue;
        }
        if (st.campaigns >= budget.max_campaigns) {
            res.exhausted = true;
            res.note = "campaign limit reached";
            continue;
        }
        if (out_of_time(budget, st)) {
            res.exhausted = true;
            res.note = "time budget exhausted";
            break;
        }
        int campaign = ++st.campaigns;
        auto& tf = ver.traces.front();
        auto report = std::make_shared<IntentReport>(extract_hs_intent(ver));
        auto ordered = prioritize(report->soft, report->hard, solver, opts.seed + static_cast<std::uint64_t>(campaign));
        auto top = top_class(ordered);
        json cj{{"event", "campaign"}, {"campaign", campaign}, {"trace", tf.partition_id}};
        cj["kind"] = to_string(tf.kind);
        cj["line"] = tf.error_line;
        cj["message"] = tf.message;
        cj["hard"] = report->hard.size();
        cj["soft"] = report->soft.size();
        json pr = json::array();
        for (auto& f : top) pr.push_back("line " + std::to_string(f.prov.line) + ": " + print_expr(strip_ssa(f.formula)));
        cj["priority"] = pr;
        if (opts.explain) cj["intent"] = explain(*report);
        log_event(st, opts, cj);
        auto anchor = report->partition(tf.partition_id)->anchor;
        auto req = build_request(cur.program, opts.filename, report, tf, top, budget.k);
        req.seed = opts.seed;
        SynthResult sr;
        ++st.synth_calls;
        try {
            sr = synthesize(req, plugin, solver);
        } catch (const NoPatches& e) {
            log_event(st, opts, json{{"event", "no_patches"}, {"campaign", campaign}});
            continue;
        } catch (const PluginFailure& e) {
            log_event(st, opts, json{{"event", "plugin_failure"}, {"campaign", campaign}, {"reason", e.what()}});
            continue;
        }
        for (auto& d : sr.dropped)
            log_event(st, opts, json{{"event", "dropped"}, {"campaign", campaign}, {"reason", d}});
        std::vector<Candidate> batch;
        int index = 0;
        for (auto& patch : sr.patches) {
            ++index;
            json pj{{"event", "patch"}, {"campaign", campaign}, {"index", index}, {"description", patch.description}};
            auto reject = [&](const std::string& why) {
                pj["admitted"] = false;
                pj["reason"] = why;
                log_event(st, opts, pj);
            };
            std::string text;
            Program next;
            try {
                text = apply_patch(cur.source, patch);
                next = parse_program(text, cur.program.source_name);
            } catch (const Error& e) {
                reject(e.what());
                continue;
            }
            text = print_program(next);
            if (seen.count(text)) {
                reject("duplicate candidate");
                continue;
            }
            Verification after;
            try {
                after = verify(next, solver);
            } catch (const PathExplosion& e) {
                reject(e.what());
                continue;
            }
            if (exhibits(after, anchor)) {
                reject("failing trace still present");
                continue;
            }
            auto violated = violated_hard_facts(*report, post_state(next, after));
            if (!violated.empty()) {
                reject("breaks hard intent at line " + std::to_string(violated.front()->prov.line));
                continue;
            }
            if (static_cast<int>(seen.size()) >= budget.max_candidates) {
                reject("candidate limit reached");
                continue;
            }
            seen.insert(text);
            pj["admitted"] = true;
            pj["failing_after"] = after.traces.size();
            log_event(st, opts, pj);
            patch.campaign = campaign;
            st.admissions.push_back({cur.source, text, patch, report->hard});
            Candidate c;
            c.source = text;
            c.program = std::move(next);
            c.lineage = cur.lineage;
            c.lineage.push_back(patch);
            c.campaign = campaign;
            batch.push_back(std::move(c));
        }
        pool.insert(pool.begin(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
    if (res.verified.empty() && !res.exhausted) res.note = "candidate pool exhausted";
    return res;
}

namespace {

Method* find_method(Program& p, const std::string& name) {
    for (auto& m : p.methods)
        if (m.name == name) return &m;
    return nullptr;
}

void assure(const Program& p, const std::vector<Test>& tests, const std::vector<Patch>& history,
            const Budget& budget, SynthPlugin& plugin, Solver& solver, const RunOptions& opts, RunState& st,
            AssuranceResult& out) {
    auto vp = co_evolve(p, budget, plugin, solver, opts, st);
    if (vp.exhausted) {
        out.exhausted = true;
        out.note = vp.note;
    }
    for (auto& pair : vp.verified) {
        std::vector<Patch> lineage = history;
        lineage.insert(lineage.end(), pair.lineage.begin(), pair.lineage.end());
        if (tests.empty()) {
            out.triples.push_back({pair.program, {}, lineage});
            if (opts.first_only) return;
            continue;
        }
        const std::string& callee = tests.front().callee;
        const Method* m = pair.program.find(callee);
        if (!m) throw ShapeError("tests call unknown method " + callee);
        auto unit = spec_test_unit(*m, tests);
        unit.source_name = callee + "_spec.mvl";
        auto vr = co_evolve(unit, budget, plugin, solver, opts, st);
        if (vr.exhausted) {
            out.exhausted = true;
            out.note = vr.note;
        }
        for (auto& u : vr.verified) {
            const Method* stub = u.program.find(callee);
            Program refined = pair.program;
            Method* rm = find_method(refined, callee);
            rm->requires_ = stub->requires_;
            rm->ensures = stub->ensures;
            refined = reparse(refined);
            std::vector<Test> tr;
            for (size_t i = 1; i < u.program.methods.size(); ++i) tr.push_back(spec_to_test(u.program.methods[i]));
            std::vector<Patch> lin = lineage;
            lin.insert(lin.end(), u.lineage.begin(), u.lineage.end());
            bool ok = conforms_prog_spec(refined, solver).holds;
            for (auto& t : tr)
                if (ok) ok = conforms_prog_test(refined, t, solver).holds;
            json ev{{"event", "refined_spec"}, {"conforms", ok}};
            log_event(st, opts, ev);
            if (ok) {
                out.triples.push_back({refined, tr, lin});
            } else if (st.campaigns < budget.max_campaigns && !out_of_time(budget, st)) {
                assure(refined, tr, lin, budget, plugin, solver, opts, st, out);
            } else {
                out.exhausted = true;
                out.note = "campaign limit reached";
            }
            if (opts.first_only && !out.triples.empty()) return;
        }
    }
}

std::string basename_of(const std::string& f) { return fs::path(f).filename().string(); }

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream o(p, std::ios::binary);
    o << text;
}

std::string transcript(const std::vector<Patch>& lineage) {
    std::string s;
    int n = 0;
    for (auto& p : lineage) {
        s += "# patch " + std::to_string(++n) + "\n";
        s += "# campaign: " + std::to_string(p.campaign) + "\n";
        s += "# synthesizer: " + p.synthesizer_id + "\n";
        if (!p.description.empty()) s += "# description: " + p.description + "\n";
        s += print_patch(p);
    }
    return s;
}

std::string joined(const std::vector<std::string>& lines) {
    std::string s;
    for (auto& l : lines) s += l + "\n";
    return s;
}

void prepare(const fs::path& dir) {
    fs::create_directories(dir);
    for (auto& e : fs::directory_iterator(dir)) {
        auto name = e.path().filename().string();
        if (name.rfind("candidate_", 0) == 0 || name.rfind("triple_", 0) == 0) fs::remove_all(e.path());
    }
}

}  // namespace

AssuranceResult automated_assurance(const Program& p, const std::vector<Test>& tests, const Budget& budget,
                                    SynthPlugin& plugin, Solver& solver, const RunOptions& opts, RunState& st) {
    AssuranceResult out;
    assure(p, tests, {}, budget, plugin, solver, opts, st, out);
    return out;
}

void write_repair_results(const std::string& dir, const CoevoResult& r, const RunOptions& opts, const RunState& st) {
    fs::path root(dir);
    prepare(root);
    std::string file = basename_of(opts.filename);
    int n = 0;
    for (auto& c : r.verified) {
        auto sub = root / ("candidate_" + std::to_string(++n));
        fs::create_directories(sub);
        write_file(sub / file, c.source);
        write_file(sub / "patches.txt", transcript(c.lineage));
        json j{{"campaign", c.campaign}, {"patches", c.lineage.size()}, {"verdict", "conforming"}};
        write_file(sub / "run.log", j.dump() + "\n");
    }
    std::string sum;
    sum += "input: " + file + "\n";
    sum += "verified: " + std::to_string(r.verified.size()) + "\n";
    sum += "campaigns: " + std::to_string(st.campaigns) + "\n";
    sum += "status: " + std::string(r.exhausted ? "budget_exhausted" : "complete") + "\n";
    if (!r.note.empty()) sum += "note: " + r.note + "\n";
    write_file(root / "summary.txt", sum);
    write_file(root / "run.log", joined(st.log));
}

void write_align_results(const std::string& dir, const AssuranceResult& r, const RunOptions& opts,
                         const RunState& st) {
    fs::path root(dir);
    prepare(root);
    std::string file = basename_of(opts.filename);
    int n = 0;
    for (auto& t : r.triples) {
        auto sub = root / ("triple_" + std::to_string(++n));
        fs::create_directories(sub);
        write_file(sub / file, print_program(t.program));
        std::string tests;
        for (auto& x : t.tests) tests += print_test(x);
        write_file(sub / "tests.mvl", tests);
        write_file(sub / "patches.txt", transcript(t.lineage));
        json j{{"patches", t.lineage.size()}, {"tests", t.tests.size()}, {"verdict", "conforming"}};
        write_file(sub / "run.log", j.dump() + "\n");
    }
    std::string sum;
    sum += "input: " + file + "\n";
    sum += "triples: " + std::to_string(r.triples.size()) + "\n";
    sum += "campaigns: " + std::to_string(st.campaigns) + "\n";
    sum += "status: " + std::string(r.exhausted && r.triples.empty() ? "budget_exhausted" : "complete") + "\n";
    if (!r.note.empty()) sum += "note: " + r.note + "\n";
    write_file(root / "summary.txt", sum);
    write_file(root / "run.log", joined(st.log));
}

}  // namespace coevo
