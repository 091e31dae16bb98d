#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/solver.hpp"
#include "coevo/vcgen.hpp"

namespace coevo {

enum class FactOrigin { ProgramStmt, SpecClause, WfCheck, Trusted };
enum class FactClass { Hard, Soft };
const char* to_string(FactOrigin o);
const char* to_string(FactClass c);

struct PriorityKey {
    int h_conflicts = 0;
    int s_conflicts = 0;
    int strength_rank = 0;
    std::uint64_t tiebreak = 0;
};

struct IntentFact {
    std::string fact_id;
    ExprPtr formula;
    // formula before the presence guard
    ExprPtr raw;
    FactOrigin origin = FactOrigin::ProgramStmt;
    FactClass cls = FactClass::Soft;
    PriorityKey priority;
    Provenance prov;
    std::string partition_id;
    // assumptions preceding the fact in its partition
    std::vector<ExprPtr> context;
    VarTypes types;
    // the whole vc of a conforming partition
    bool whole_vc = false;
    bool target = false;
    std::string wf_site;
    std::string anchor;
};

struct IntentReport {
    std::vector<IntentFact> hard;
    std::vector<IntentFact> soft;
    std::map<std::string, bool> partitions;
    std::map<std::string, VerdictStatus> statuses;
    std::vector<VcPartition> parts;
    // nonconforming partitions, invalid before unknown, shortest first
    std::vector<FailingTrace> traces;

    bool conforming() const { return traces.empty(); }
    const VcPartition* partition(const std::string& id) const;
};

struct Verification {
    std::vector<VcPartition> parts;
    std::map<std::string, VerdictStatus> statuses;
    std::map<std::string, std::optional<Env>> witnesses;
    std::vector<FailingTrace> traces;
    bool holds() const { return traces.empty(); }
};

Verification verify(const Program& p, Solver& s);

IntentReport extract_hs_intent(const Program& p, Solver& s);
IntentReport extract_hs_intent(const Verification& v);

IntentFact transform_wf(const IntentFact& f);

// fingerprints of everything a hard fact can refer to after a patch
struct PostState {
    std::map<std::string, std::vector<const VcPartition*>> by_anchor;
    std::map<std::string, VerdictStatus> statuses;
    std::set<std::string> wf_sites;
    std::set<std::string> node_keys;
};
PostState post_state(const Program& patched, const Verification& v);

// a hard fact that held before the patch still holds afterwards
bool held(const IntentFact& f);
bool preserved(const IntentFact& f, const PostState& post);
std::vector<const IntentFact*> violated_hard_facts(const IntentReport& before, const PostState& after);

// replace presence markers by their truth value in a program
ExprPtr resolve_presence(const ExprPtr& e, const std::set<std::string>& sites);

// nodes to print as trusted in a repair request
std::set<StmtId> hard_nodes(const IntentReport& r);

std::string explain(const IntentReport& r);

}  // namespace coevo
