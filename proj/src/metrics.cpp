#include "coevo/metrics.hpp"

#include <random>
#include <set>

#include "coevo/coevolution.hpp"
#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/intent.hpp"
#include "coevo/printer.hpp"

namespace coevo {

namespace {

std::map<std::string, ExprPtr> inputs_of(const Test& t) {
    std::map<std::string, ExprPtr> m;
    for (auto& in : t.inputs) m[in.name] = in.value;
    return m;
}

std::int64_t first_length(const Test& t) {
    for (auto& in : t.inputs)
        if (auto* a = std::get_if<ArrayLit>(&in.value->node)) return static_cast<std::int64_t>(a->elems.size());
    return 0;
}

const char* const kSummaryTemplate =
    "// System prompt\n"
    "You are an expert requirement engineer. \n"
    "You have been given a program in Dafny which you have to summarize such that the summary can be reused by "
    "developers for later implementation.\n"
    "The summary should be in a higher level and should be able to guide the developers to implement the program.\n"
    "\n"
    "// Prompt\n"
    "This is a program in Dafny. Lines with {{:trusted}} represent statements that were verfied by a developer and "
    "have been shown to be important.\n"
    "\n"
    "Can you extract a summary of the program acting as requirements such that another developer can read it and "
    "generate a program of the same quality and behavior?\n"
    "\n"
    "Focus on the summary being in a higher level. Put the summary in triple backticks (```).\n"
    "{program}\n";

}  // namespace

std::int64_t pinned_output(const Test& t) {
    auto inputs = inputs_of(t);
    for (auto& c : t.oracle)
        for (auto& part : conjuncts(c.expr)) {
            auto* b = std::get_if<Binary>(&part->node);
            if (!b || b->op != BinOp::Eq) continue;
            for (int side = 0; side < 2; ++side) {
                auto* v = std::get_if<VarRef>(&(side ? b->rhs : b->lhs)->node);
                auto& e = side ? b->lhs : b->rhs;
                if (!v || v->name != t.result || free_vars(*e).count(t.result)) continue;
                auto value = eval_value(*substitute(e, inputs), {});
                if (auto* i = std::get_if<std::int64_t>(&value)) return *i;
            }
        }
    throw ShapeError("oracle of " + t.name + " does not pin an integer result");
}

std::vector<MutationOutcome> output_mutants(const Test& t, int n, std::uint64_t seed) {
    std::int64_t v = pinned_output(t);
    std::int64_t len = first_length(t);
    std::mt19937_64 rng(seed);
    std::vector<MutationOutcome> out;
    std::set<std::int64_t> seen{v};
    int attempts = 0;
    while (static_cast<int>(out.size()) < n) {
        if (++attempts > 100 * n) throw InsufficientDistinctMutations("only " + std::to_string(out.size()) +
                                                                      " distinct mutants for " + t.name);
        int steps = 1 + static_cast<int>(rng() % 3);
        std::int64_t x = v;
        std::string ops;
        for (int s = 0; s < steps; ++s) {
            if (!ops.empty()) ops += ",";
            switch (rng() % 6) {
                case 0: x += 1; ops += "+1"; break;
                case 1: x -= 1; ops += "-1"; break;
                case 2: x = -x; ops += "neg"; break;
                case 3: x = len; ops += "len"; break;
                case 4: x = 0; ops += "zero"; break;
                default: {
                    std::int64_t r = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(2 * n));
                    x = rng() % 2 ? len + 1 + r : -(len + 1 + r);
                    ops += "sentinel";
                }
            }
        }
        if (!seen.insert(x).second) continue;
        out.push_back({t.name, ops, v, x, false});
    }
    return out;
}

CompletenessResult completeness(const Method& spec, const std::vector<Test>& tests, Solver& solver, int n,
                                std::uint64_t seed) {
    if (n < 1) throw ShapeError("at least one mutation is needed");
    CompletenessResult r;
    std::uint64_t k = 0;
    for (auto& t : tests) {
        for (auto& m : output_mutants(t, n, seed + k++)) {
            Test mt = t;
            Clause c;
            c.expr = mk_bin(BinOp::Ne, mk_var(t.result), mk_int(m.mutated));
            c.trust = t.trust;
            mt.oracle = {c};
            m.inconsistent = conforms_spec_test(spec, mt, solver).holds;
            if (m.inconsistent) ++r.killed;
            ++r.total;
            r.per_mutation.push_back(m);
        }
    }
    return r;
}

std::string summary_prompt_template() { return kSummaryTemplate; }

std::string build_summary_prompt(const std::string& annotated_program) {
    std::string t = kSummaryTemplate;
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t.compare(i, 9, "{program}") == 0) {
            out += annotated_program;
            i += 8;
        } else if (t.compare(i, 2, "{{") == 0 || t.compare(i, 2, "}}") == 0) {
            out += t[i];
            ++i;
        } else {
            out += t[i];
        }
    }
    return out;
}

std::string build_summary_prompt(const Program& p, Solver& solver) {
    PrintOptions opts;
    if (!p.methods.empty()) opts.extra_trusted = hard_nodes(extract_hs_intent(p, solver));
    return build_summary_prompt(p.methods.empty() ? std::string() : print_program(p, opts));
}

}  // namespace coevo
