#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "coevo/ast.hpp"
#include "coevo/intent.hpp"
#include "coevo/solver.hpp"

namespace coevo {

// orders soft facts by (h desc, s desc, rank asc, seeded tiebreak) and fills their priority keys
std::vector<IntentFact> prioritize(const std::vector<IntentFact>& soft, const std::vector<IntentFact>& hard,
                                   Solver& solver, std::uint64_t seed);
std::vector<IntentFact> top_class(const std::vector<IntentFact>& ordered);

// f implies g and not the converse
bool stronger(const IntentFact& f, const IntentFact& g, Solver& solver);

struct Hunk {
    std::string file;
    std::string original;
    std::string patched;
};

struct Patch {
    std::vector<Hunk> hunks;
    std::string synthesizer_id;
    int campaign = 0;
    std::string description;
};

struct SynthRequest {
    std::string filename;
    std::string program;
    std::string error_trace;
    std::string error;
    std::vector<std::string> trace_assertions;
    std::string context;
    std::vector<std::string> priority;
    int k = 5;

    // structured view for builtin plugins
    std::shared_ptr<const Program> ast;
    std::string canonical;
    std::shared_ptr<const IntentReport> report;
    FailingTrace trace;
    std::vector<IntentFact> top;
    std::uint64_t seed = 0;
};

SynthRequest build_request(const Program& p, const std::string& filename, std::shared_ptr<const IntentReport> report,
                           const FailingTrace& trace, const std::vector<IntentFact>& top, int k);
std::string request_json(const SynthRequest& r);

class SynthPlugin {
public:
    virtual ~SynthPlugin() = default;
    virtual std::string id() const = 0;
    // raw patches, before the frozen-line filter
    virtual std::vector<Patch> propose(const SynthRequest& req, Solver& solver) = 0;
};

class EnumerativePlugin : public SynthPlugin {
public:
    std::string id() const override { return "enumerative"; }
    std::vector<Patch> propose(const SynthRequest& req, Solver& solver) override;
};

class ExternalPlugin : public SynthPlugin {
public:
    ExternalPlugin(std::string cmd, int timeout_ms) : cmd_(std::move(cmd)), timeout_ms_(timeout_ms) {}
    std::string id() const override { return "external"; }
    std::vector<Patch> propose(const SynthRequest& req, Solver& solver) override;

private:
    std::string cmd_;
    int timeout_ms_;
};

std::unique_ptr<SynthPlugin> make_plugin(const std::string& builtin, const std::string& cmd, int timeout_ms);

struct SynthResult {
    std::vector<Patch> patches;
    // one line per dropped hunk or patch
    std::vector<std::string> dropped;
};

// asks the plugin and drops hunks touching frozen lines; NoPatches when nothing survives
SynthResult synthesize(const SynthRequest& req, SynthPlugin& plugin, Solver& solver);

// lines of the text that no patch may change
std::set<std::string> frozen_lines(const std::string& annotated);
bool is_frozen_line(const std::string& line);

std::string print_patch(const Patch& p, int first_index = 1);
std::vector<Hunk> parse_hunks(const std::string& text);
// `# patch N` separated replies, or a single patch
std::vector<Patch> parse_reply(const std::string& text);

std::string apply_patch(const std::string& source, const Patch& patch);

// line diff of two canonical texts into unique-context hunks
Patch diff_patch(const std::string& before, const std::string& after, const std::string& file);

std::string ensure_marker(const std::string& line);

}  // namespace coevo
