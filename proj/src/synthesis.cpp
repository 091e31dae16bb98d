#include "coevo/synthesis.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/printer.hpp"
#include "coevo/subprocess.hpp"
#include "json.hpp"

namespace coevo {

namespace {

ExprPtr de_ssa(const IntentFact& f, VarTypes& types) {
    for (auto& [v, t] : f.types) types[strip_ssa_name(v)] = t;
    return strip_ssa(f.raw);
}

bool jointly_unsat(const IntentFact& f, const IntentFact& g, Solver& s) {
    VarTypes types;
    auto a = de_ssa(f, types);
    auto b = de_ssa(g, types);
    return s.unsat(mk_and(a, b), types);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_lines(const std::vector<std::string>& lines, size_t from, size_t to) {
    std::string s;
    for (size_t i = from; i < to; ++i) s += lines[i] + "\n";
    return s;
}

std::vector<size_t> occurrences(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    std::vector<size_t> out;
    if (needle.empty() || needle.size() > hay.size()) return out;
    for (size_t i = 0; i + needle.size() <= hay.size(); ++i)
        if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) out.push_back(i);
    return out;
}

std::string rtrim(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

bool stronger(const IntentFact& f, const IntentFact& g, Solver& solver) {
    VarTypes types;
    auto a = de_ssa(f, types);
    auto b = de_ssa(g, types);
    return solver.valid(mk_implies(a, b), types) && !solver.valid(mk_implies(b, a), types);
}

std::vector<IntentFact> prioritize(const std::vector<IntentFact>& soft, const std::vector<IntentFact>& hard,
                                   Solver& solver, std::uint64_t seed) {
    std::vector<IntentFact> out = soft;
    std::mt19937_64 rng(seed);
    for (auto& f : out) {
        f.priority = {};
        f.priority.tiebreak = rng();
    }
    for (auto& f : out) {
        int h = 0;
        std::optional<bool> alone;
        for (auto& g : hard) {
            if (!g.whole_vc && g.origin == FactOrigin::WfCheck) {
                if (f.prov.node.valid() && g.partition_id == f.partition_id && g.prov.node == f.prov.node) {
                    ++h;
                    continue;
                }
                for (auto& ob : wf_obligations(f.raw)) {
                    auto site = f.prov.method + "/" + f.prov.clause_kind + "/" + print_expr(strip_ssa(ob.site));
                    if (site != g.wf_site) continue;
                    auto v = solver.check(implication_chain(f.context, ob.closed), f.types);
                    if (v.status == VerdictStatus::Invalid) {
                        ++h;
                        break;
                    }
                }
            } else if (g.whole_vc) {
                if (!alone) alone = solver.unsat(f.raw, f.types);
                if (*alone) ++h;
            } else if (jointly_unsat(f, g, solver)) {
                ++h;
            }
        }
        f.priority.h_conflicts = h;
    }
    size_t n = out.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (jointly_unsat(out[i], out[j], solver)) {
                ++out[i].priority.s_conflicts;
                ++out[j].priority.s_conflicts;
            }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j && stronger(out[j], out[i], solver)) ++out[i].priority.strength_rank;
    std::stable_sort(out.begin(), out.end(), [](const IntentFact& a, const IntentFact& b) {
        auto& p = a.priority;
        auto& q = b.priority;
        return std::make_tuple(-p.h_conflicts, -p.s_conflicts, p.strength_rank, p.tiebreak) <
               std::make_tuple(-q.h_conflicts, -q.s_conflicts, q.strength_rank, q.tiebreak);
    });
    return out;
}

std::vector<IntentFact> top_class(const std::vector<IntentFact>& ordered) {
    std::vector<IntentFact> out;
    for (auto& f : ordered) {
        auto& p = f.priority;
        if (!out.empty()) {
            auto& q = out.front().priority;
            if (p.h_conflicts != q.h_conflicts || p.s_conflicts != q.s_conflicts || p.strength_rank != q.strength_rank)
                break;
        }
        out.push_back(f);
    }
    return out;
}

SynthRequest build_request(const Program& p, const std::string& filename, std::shared_ptr<const IntentReport> report,
                           const FailingTrace& trace, const std::vector<IntentFact>& top, int k) {
    SynthRequest r;
    r.filename = filename;
    PrintOptions opts;
    if (report) opts.extra_trusted = hard_nodes(*report);
    r.program = print_program(p, opts);
    r.canonical = print_program(p);
    r.ast = std::make_shared<Program>(p);
    r.report = report;
    r.trace = trace;
    r.top = top;
    r.k = k;
    std::string steps;
    for (auto& s : trace.steps) steps += "line " + std::to_string(s.line) + ": " + s.text + "\n";
    r.error_trace = steps;
    std::string stmt = trace.steps.empty() ? "" : trace.steps.back().text;
    r.error = "line " + std::to_string(trace.error_line) + ": " + trace.message + " Failing assertion `" +
              print_expr(strip_ssa(trace.failing)) + "` of `" + stmt + "`.";
    if (trace.related_line && trace.related_line != trace.error_line)
        r.error += "\nline " + std::to_string(trace.related_line) + ": This is the clause that might not hold.";
    if (report) {
        if (auto* part = report->partition(trace.partition_id)) {
            std::set<std::string> seen;
            for (auto& s : part->path) {
                if (s.op != PassiveStmt::Op::Assert) continue;
                auto line = "line " + std::to_string(s.prov.line) + ": " + s.prov.text;
                if (seen.insert(line).second) r.trace_assertions.push_back(line);
            }
        }
    }
    r.context =
        "Assertions only check a property; they do not remove states.\n"
        "Array reads in code and in specifications must stay within 0 .. a.Length - 1.\n"
        "Lines marked {:trusted} or // pr {:trusted} must not change.";
    std::set<std::string> seen;
    for (auto& f : top) {
        auto line = "line " + std::to_string(f.prov.line) + ": " + f.prov.text;
        if (seen.insert(line).second) r.priority.push_back(line);
    }
    return r;
}

std::string request_json(const SynthRequest& r) {
    nlohmann::ordered_json j;
    j["filename"] = r.filename;
    j["program"] = r.program;
    j["error_trace"] = r.error_trace;
    j["error"] = r.error;
    j["trace_assertions"] = r.trace_assertions;
    j["context"] = r.context;
    j["priority"] = r.priority;
    j["k"] = r.k;
    return j.dump();
}

bool is_frozen_line(const std::string& line) {
    return line.find("{:trusted}") != std::string::npos || line.find("@trust") != std::string::npos;
}

std::set<std::string> frozen_lines(const std::string& annotated) {
    std::set<std::string> out;
    for (auto& l : split_lines(annotated))
        if (is_frozen_line(l)) out.insert(l);
    return out;
}

std::string ensure_marker(const std::string& line) {
    auto t = rtrim(line);
    if (t.empty()) return t;
    if (t.size() >= std::string(kPatchedMarker).size() &&
        t.compare(t.size() - std::string(kPatchedMarker).size(), std::string::npos, kPatchedMarker) == 0)
        return t;
    return t + " " + kPatchedMarker;
}

std::string print_patch(const Patch& p, int first_index) {
    std::ostringstream os;
    int n = first_index;
    for (auto& h : p.hunks) {
        os << "# modification " << n++ << "\n";
        os << "<file>" << h.file << "</file>\n";
        os << "<original>\n" << h.original << "</original>\n";
        os << "<patched>\n" << h.patched << "</patched>\n";
    }
    return os.str();
}

namespace {

std::string strip_tag_newlines(std::string s) {
    if (!s.empty() && s.front() == '\n') s.erase(0, 1);
    else if (s.size() >= 2 && s[0] == '\r' && s[1] == '\n') s.erase(0, 2);
    if (!s.empty() && s.back() != '\n') s += '\n';
    return s;
}

bool take_tag(const std::string& text, size_t& pos, const std::string& tag, std::string& out) {
    auto open = "<" + tag + ">", close = "</" + tag + ">";
    auto a = text.find(open, pos);
    if (a == std::string::npos) return false;
    auto b = text.find(close, a + open.size());
    if (b == std::string::npos) return false;
    out = text.substr(a + open.size(), b - a - open.size());
    pos = b + close.size();
    return true;
}

}  // namespace

std::vector<Hunk> parse_hunks(const std::string& text) {
    std::vector<Hunk> out;
    size_t pos = 0;
    while (true) {
        Hunk h;
        std::string file, orig, patched;
        size_t p = pos;
        if (!take_tag(text, p, "file", file)) break;
        if (!take_tag(text, p, "original", orig)) break;
        if (!take_tag(text, p, "patched", patched)) break;
        h.file = file;
        h.original = orig.empty() || orig == "\n" ? "" : strip_tag_newlines(orig);
        h.patched = patched.empty() || patched == "\n" ? "" : strip_tag_newlines(patched);
        out.push_back(std::move(h));
        pos = p;
    }
    return out;
}

std::vector<Patch> parse_reply(const std::string& text) {
    static const std::regex sep(R"(^# patch \d+\s*$)");
    std::vector<std::string> chunks;
    std::string cur;
    bool any = false;
    for (auto& line : split_lines(text)) {
        if (std::regex_match(line, sep)) {
            if (any || !cur.empty()) chunks.push_back(cur);
            cur.clear();
            any = true;
            continue;
        }
        cur += line + "\n";
    }
    chunks.push_back(cur);
    std::vector<Patch> out;
    for (auto& c : chunks) {
        Patch p;
        p.hunks = parse_hunks(c);
        if (!p.hunks.empty()) out.push_back(std::move(p));
    }
    return out;
}

std::string apply_patch(const std::string& source, const Patch& patch) {
    auto lines = split_lines(source);
    for (auto& h : patch.hunks) {
        auto orig = split_lines(h.original);
        auto occ = occurrences(lines, orig);
        if (occ.empty()) throw PatchError(PatchErrorKind::OriginalNotFound, "original text not found:\n" + h.original);
        if (occ.size() > 1)
            throw PatchError(PatchErrorKind::AmbiguousOriginal, "original text occurs more than once:\n" + h.original);
        std::vector<std::string> repl;
        for (auto& l : split_lines(h.patched)) {
            bool kept = std::find(orig.begin(), orig.end(), l) != orig.end();
            repl.push_back(kept || rtrim(l).empty() ? l : ensure_marker(l));
        }
        lines.erase(lines.begin() + static_cast<long>(occ[0]), lines.begin() + static_cast<long>(occ[0] + orig.size()));
        lines.insert(lines.begin() + static_cast<long>(occ[0]), repl.begin(), repl.end());
    }
    auto out = join_lines(lines, 0, lines.size());
    try {
        parse_program(out);
    } catch (const Error& e) {
        throw PatchError(PatchErrorKind::ReparseFailure, std::string("patched program does not parse: ") + e.what());
    }
    return out;
}

Patch diff_patch(const std::string& before, const std::string& after, const std::string& file) {
    auto a = split_lines(before), b = split_lines(after);
    size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = n; i-- > 0;)
        for (size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    struct Group {
        size_t a0, a1, b0, b1;
    };
    std::vector<Group> groups;
    size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && a[i] == b[j]) {
            ++i;
            ++j;
            continue;
        }
        Group g{i, i, j, j};
        while ((i < n || j < m) && !(i < n && j < m && a[i] == b[j])) {
            if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) ++j;
            else ++i;
        }
        g.a1 = i;
        g.b1 = j;
        groups.push_back(g);
    }
    auto unique = [&](size_t a0, size_t a1) {
        std::vector<std::string> needle(a.begin() + static_cast<long>(a0), a.begin() + static_cast<long>(a1));
        return occurrences(a, needle).size() == 1;
    };
    for (auto& g : groups) {
        if (g.a0 == g.a1 && g.a0 > 0) {
            --g.a0;
            --g.b0;
        } else if (g.a0 == g.a1) {
            ++g.a1;
            ++g.b1;
        }
        while (!unique(g.a0, g.a1)) {
            if (g.a0 > 0) {
                --g.a0;
                --g.b0;
            } else if (g.a1 < n) {
                ++g.a1;
                ++g.b1;
            } else {
                break;
            }
        }
    }
    std::vector<Group> merged;
    for (auto& g : groups) {
        if (!merged.empty() && g.a0 <= merged.back().a1) {
            merged.back().a1 = std::max(merged.back().a1, g.a1);
            merged.back().b1 = std::max(merged.back().b1, g.b1);
        } else {
            merged.push_back(g);
        }
    }
    Patch p;
    for (auto& g : merged) p.hunks.push_back({file, join_lines(a, g.a0, g.a1), join_lines(b, g.b0, g.b1)});
    return p;
}

SynthResult synthesize(const SynthRequest& req, SynthPlugin& plugin, Solver& solver) {
    SynthResult res;
    auto raw = plugin.propose(req, solver);
    auto ann = split_lines(req.program);
    auto canon = split_lines(req.canonical.empty() ? req.program : req.canonical);
    std::set<std::string> seen;
    for (auto& p : raw) {
        Patch out;
        out.synthesizer_id = plugin.id();
        out.description = p.description;
        bool bad = false;
        for (auto& h : p.hunks) {
            auto orig = split_lines(h.original);
            auto in_ann = occurrences(ann, orig);
            auto in_canon = occurrences(canon, orig);
            size_t at;
            if (in_ann.size() == 1) at = in_ann[0];
            else if (in_canon.size() == 1) at = in_canon[0];
            else {
                res.dropped.push_back("hunk original not found uniquely: " + (orig.empty() ? "" : orig[0]));
                bad = true;
                break;
            }
            auto patched = split_lines(h.patched);
            bool touches = false;
            for (size_t k = 0; k < orig.size(); ++k) {
                auto& frozen = ann[at + k];
                if (!is_frozen_line(frozen) && !is_frozen_line(canon[at + k])) continue;
                bool kept = std::find(patched.begin(), patched.end(), ann[at + k]) != patched.end() ||
                            std::find(patched.begin(), patched.end(), canon[at + k]) != patched.end();
                if (!kept) touches = true;
            }
            if (touches) {
                res.dropped.push_back("hunk modifies a frozen line: " + (orig.empty() ? "" : orig[0]));
                bad = true;
                break;
            }
            Hunk c;
            c.file = req.filename;
            std::vector<std::string> corig(canon.begin() + static_cast<long>(at),
                                           canon.begin() + static_cast<long>(at + orig.size()));
            c.original = join_lines(corig, 0, corig.size());
            for (auto& l : patched) {
                std::string line = l;
                for (size_t k = 0; k < orig.size(); ++k)
                    if (l == ann[at + k]) line = canon[at + k];
                bool kept = std::find(corig.begin(), corig.end(), line) != corig.end();
                c.patched += (kept || rtrim(line).empty() ? line : ensure_marker(line)) + "\n";
            }
            out.hunks.push_back(std::move(c));
        }
        if (bad || out.hunks.empty()) continue;
        if (!seen.insert(print_patch(out)).second) continue;
        res.patches.push_back(std::move(out));
        if (static_cast<int>(res.patches.size()) >= req.k) break;
    }
    if (res.patches.empty()) throw NoPatches();
    return res;
}

std::vector<Patch> ExternalPlugin::propose(const SynthRequest& req, Solver&) {
    auto r = run_process(cmd_, request_json(req) + "\n", timeout_ms_);
    if (r.timed_out) throw PluginFailure("synthesizer timed out");
    if (r.exit_status != 0)
        throw PluginFailure("synthesizer exited with status " + std::to_string(r.exit_status) + ": " + r.err);
    auto patches = parse_reply(r.out);
    if (patches.empty() && r.out.find_first_not_of(" \t\r\n") != std::string::npos)
        throw PluginFailure("malformed synthesizer reply");
    for (auto& p : patches) p.synthesizer_id = id();
    return patches;
}

std::unique_ptr<SynthPlugin> make_plugin(const std::string& builtin, const std::string& cmd, int timeout_ms) {
    if (!cmd.empty() && builtin != "enumerative") return std::make_unique<ExternalPlugin>(cmd, timeout_ms);
    return std::make_unique<EnumerativePlugin>();
}

}  // namespace coevo
