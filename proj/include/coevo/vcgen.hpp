#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/solver.hpp"

namespace coevo {

enum class VcKind { Postcondition, IntermediateAssert, WfCheck, InvariantEntry, InvariantMaintain, SignatureWf };
const char* to_string(VcKind k);

enum class NodeRole { ProgramStmt, SpecClause, Glue };

struct Provenance {
    StmtId node;
    int line = 0;
    NodeRole role = NodeRole::Glue;
    bool trusted = false;
    // requires / ensures / invariant / stmt
    std::string clause_kind;
    std::string method;
    // method + kind + normalized text of the source node
    std::string node_key;
    std::string text;
};

struct Decision {
    std::string site;
    bool taken = true;
};

struct PassiveStmt {
    enum class Op { Assume, Assert, Skip } op = Op::Skip;
    ExprPtr formula;
    Provenance prov;
    VcKind kind = VcKind::IntermediateAssert;
    bool wf = false;
    // source-level access (or divisor) text for wf obligations
    std::string wf_site;
    std::string wf_what;
    bool call_pre = false;
    int group = -1;
    std::optional<Decision> decision;
    int uid = 0;
};

struct PassiveBlock {
    std::string id;
    std::vector<PassiveStmt> stmts;
    std::vector<std::string> successors;
};

struct PassiveGraph {
    std::string method;
    std::vector<PassiveBlock> blocks;
    VarTypes types;
};

struct VcPartition {
    std::string partition_id;
    std::string method;
    VcKind kind = VcKind::IntermediateAssert;
    std::vector<PassiveStmt> path;
    PassiveStmt target;
    ExprPtr vc;
    VarTypes types;
    std::vector<std::string> decisions;
    std::string anchor;
    int error_line = 0;
    int related_line = 0;

    std::vector<StmtId> path_ids() const;
    std::vector<ExprPtr> antecedents() const;
};

struct TraceStep {
    StmtId id;
    int line = 0;
    NodeRole role = NodeRole::ProgramStmt;
    std::string text;
};

struct FailingTrace {
    std::string partition_id;
    std::vector<TraceStep> steps;
    ExprPtr failing;
    VcKind kind = VcKind::IntermediateAssert;
    int error_line = 0;
    int related_line = 0;
    std::string message;
    bool unknown = false;
    std::optional<Env> witness;
};

inline constexpr int kMaxPaths = 256;

PassiveGraph passify(const Method& m, const Program& p);
std::string dump(const PassiveGraph& g);

std::vector<VcPartition> vc_gen(const Program& p);
std::vector<VcPartition> vc_gen_method(const Method& m, const Program& p);

FailingTrace trace_of(const VcPartition& part);

// method + clause kind + normalized source text
std::string node_key(const std::string& method, const std::string& kind, const std::string& text);

// wf obligations of a formula, as closed formulas with their access sites
struct WfFrame {
    // non-empty for a quantifier frame
    std::string var;
    ExprPtr guard;
};
struct WfObligation {
    ExprPtr closed;
    std::vector<WfFrame> frames;
    ExprPtr bound;
    ExprPtr site;
    std::string what;
};
std::vector<WfObligation> wf_obligations(const ExprPtr& e);

// every wf site fingerprint of the program (method/kind/access)
std::vector<std::string> wf_sites(const Program& p);

// node keys of every clause and statement of the program
std::set<std::string> node_keys(const Program& p);

}  // namespace coevo
