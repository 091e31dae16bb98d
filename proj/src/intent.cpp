#include "coevo/intent.hpp"

#include <algorithm>
#include <sstream>

#include "coevo/expr.hpp"
#include "coevo/printer.hpp"

namespace coevo {

const char* to_string(FactOrigin o) {
    switch (o) {
        case FactOrigin::ProgramStmt: return "program_stmt";
        case FactOrigin::SpecClause: return "spec_clause";
        case FactOrigin::WfCheck: return "wf_check";
        case FactOrigin::Trusted: return "trusted";
    }
    return "?";
}

const char* to_string(FactClass c) { return c == FactClass::Hard ? "hard" : "soft"; }

const VcPartition* IntentReport::partition(const std::string& id) const {
    for (auto& p : parts)
        if (p.partition_id == id) return &p;
    return nullptr;
}

Verification verify(const Program& p, Solver& s) {
    Verification v;
    v.parts = vc_gen(p);
    std::vector<std::pair<size_t, FailingTrace>> bad;
    for (size_t i = 0; i < v.parts.size(); ++i) {
        auto& part = v.parts[i];
        auto verdict = s.check(part.vc, part.types);
        v.statuses[part.partition_id] = verdict.status;
        v.witnesses[part.partition_id] = verdict.witness;
        if (verdict.status == VerdictStatus::Valid) continue;
        auto t = trace_of(part);
        t.unknown = verdict.status == VerdictStatus::Unknown;
        t.witness = verdict.witness;
        bad.push_back({i, std::move(t)});
    }
    std::stable_sort(bad.begin(), bad.end(), [](auto& a, auto& b) {
        auto key = [](auto& x) {
            return std::make_tuple(x.second.unknown, x.second.steps.size(), x.second.error_line, x.first);
        };
        return key(a) < key(b);
    });
    for (auto& [i, t] : bad) v.traces.push_back(std::move(t));
    return v;
}

IntentFact transform_wf(const IntentFact& f) {
    IntentFact g = f;
    g.origin = FactOrigin::WfCheck;
    g.formula = mk_implies(mk_presence(f.wf_site, "L" + std::to_string(f.prov.line)), f.raw);
    g.anchor = "wf|" + f.wf_site;
    return g;
}

namespace {

FactOrigin origin_of(const PassiveStmt& s) {
    if (s.prov.trusted) return FactOrigin::Trusted;
    if (s.wf) return FactOrigin::WfCheck;
    return s.prov.role == NodeRole::SpecClause ? FactOrigin::SpecClause : FactOrigin::ProgramStmt;
}

std::string fact_key(const Provenance& p, const ExprPtr& f, bool whole) {
    return (whole ? "vc:" : "") + std::to_string(p.node.value) + ":" + p.node_key + "|" + normal_key(f);
}

}  // namespace

IntentReport extract_hs_intent(const Verification& v) {
    IntentReport r;
    r.parts = v.parts;
    r.statuses = v.statuses;
    r.traces = v.traces;
    std::vector<IntentFact> hard, soft;
    std::set<std::string> hard_ids, soft_ids;
    auto add = [&](IntentFact f) {
        if (f.cls == FactClass::Hard) {
            if (hard_ids.insert(f.fact_id).second) hard.push_back(std::move(f));
        } else if (soft_ids.insert(f.fact_id).second) {
            soft.push_back(std::move(f));
        }
    };
    for (auto& part : v.parts) {
        auto st = v.statuses.at(part.partition_id);
        bool ok = st == VerdictStatus::Valid;
        r.partitions[part.partition_id] = ok;
        if (ok) {
            IntentFact f;
            f.formula = f.raw = part.vc;
            f.prov = part.target.prov;
            f.origin = origin_of(part.target);
            f.cls = FactClass::Hard;
            f.partition_id = part.partition_id;
            f.types = part.types;
            f.whole_vc = true;
            f.target = true;
            f.wf_site = part.target.wf_site;
            f.anchor = part.anchor;
            f.fact_id = fact_key(f.prov, f.raw, true);
            add(std::move(f));
            continue;
        }
        std::vector<ExprPtr> ctx;
        auto fact_of = [&](const PassiveStmt& s, bool is_target) {
            IntentFact f;
            f.formula = f.raw = s.formula;
            f.prov = s.prov;
            f.origin = origin_of(s);
            f.partition_id = part.partition_id;
            f.context = ctx;
            f.types = part.types;
            f.target = is_target;
            f.wf_site = s.wf_site;
            f.anchor = is_target ? part.anchor : "";
            f.fact_id = fact_key(f.prov, f.raw, false);
            if (f.origin == FactOrigin::Trusted) {
                f.cls = FactClass::Hard;
                f.anchor = "node|" + f.prov.node_key;
            } else if (s.wf) {
                f.cls = FactClass::Hard;
                f = transform_wf(f);
            }
            return f;
        };
        for (auto& s : part.path) {
            if (s.prov.role != NodeRole::Glue) add(fact_of(s, false));
            ctx.push_back(s.formula);
        }
        add(fact_of(part.target, true));
    }
    for (auto& f : soft)
        if (!hard_ids.count(f.fact_id)) r.soft.push_back(std::move(f));
    r.hard = std::move(hard);
    return r;
}

IntentReport extract_hs_intent(const Program& p, Solver& s) { return extract_hs_intent(verify(p, s)); }

PostState post_state(const Program& patched, const Verification& v) {
    PostState ps;
    for (auto& part : v.parts) ps.by_anchor[part.anchor].push_back(&part);
    ps.statuses = v.statuses;
    for (auto& w : wf_sites(patched)) ps.wf_sites.insert(w);
    ps.node_keys = node_keys(patched);
    return ps;
}

bool held(const IntentFact& f) { return f.whole_vc || f.origin == FactOrigin::Trusted; }

bool preserved(const IntentFact& f, const PostState& post) {
    if (!held(f)) return true;
    if (f.whole_vc) {
        auto it = post.by_anchor.find(f.anchor);
        if (it == post.by_anchor.end()) return true;
        for (auto* p : it->second)
            if (post.statuses.at(p->partition_id) != VerdictStatus::Valid) return false;
        return true;
    }
    return post.node_keys.count(f.prov.node_key) > 0;
}

std::vector<const IntentFact*> violated_hard_facts(const IntentReport& before, const PostState& after) {
    std::vector<const IntentFact*> out;
    for (auto& f : before.hard)
        if (!preserved(f, after)) out.push_back(&f);
    return out;
}

ExprPtr resolve_presence(const ExprPtr& e, const std::set<std::string>& sites) {
    return rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (auto* p = std::get_if<Presence>(&x->node)) return mk_bool(sites.count(p->fingerprint) > 0);
        return nullptr;
    });
}

std::set<StmtId> hard_nodes(const IntentReport& r) {
    std::set<StmtId> hard, soft;
    for (auto& f : r.soft)
        if (f.prov.node.valid()) soft.insert(f.prov.node);
    // a node that breaks its own wf obligation is at odds with the hard intent
    for (auto& f : r.hard)
        if (f.origin == FactOrigin::WfCheck && !f.whole_vc && f.prov.node.valid()) soft.insert(f.prov.node);
    for (auto& f : r.hard) {
        // wf obligations are guarded by presence, so their own node stays editable
        bool wf = f.origin == FactOrigin::WfCheck;
        if (f.whole_vc) {
            if (auto* p = r.partition(f.partition_id)) {
                wf = wf || p->kind == VcKind::WfCheck || p->kind == VcKind::SignatureWf;
                for (auto& id : p->path_ids())
                    if (!wf || id != f.prov.node) hard.insert(id);
            }
        }
        if (f.prov.node.valid() && !wf) hard.insert(f.prov.node);
    }
    std::set<StmtId> out;
    for (auto& id : hard)
        if (!soft.count(id)) out.insert(id);
    return out;
}

std::string explain(const IntentReport& r) {
    std::ostringstream os;
    os << "partitions:\n";
    for (auto& p : r.parts)
        os << "  " << p.partition_id << " " << to_string(p.kind) << " " << to_string(r.statuses.at(p.partition_id))
           << "\n";
    auto facts = [&](const char* title, const std::vector<IntentFact>& fs) {
        os << title << ": " << fs.size() << "\n";
        for (auto& f : fs) {
            os << "  - origin: " << to_string(f.origin) << "\n";
            os << "    class: " << to_string(f.cls) << "\n";
            os << "    line: " << f.prov.line << "\n";
            os << "    partition: " << f.partition_id << "\n";
            os << "    source: " << f.prov.text << "\n";
            os << "    priority: " << f.priority.h_conflicts << " " << f.priority.s_conflicts << " "
               << f.priority.strength_rank << "\n";
            os << "    formula: " << (f.whole_vc ? "vc of " + f.partition_id : print_expr(f.formula)) << "\n";
        }
    };
    facts("hard", r.hard);
    facts("soft", r.soft);
    return os.str();
}

}  // namespace coevo
