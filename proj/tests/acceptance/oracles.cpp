#include "oracles.hpp"

#include <set>
#include <sstream>

#include "coevo/expr.hpp"
#include "coevo/parser.hpp"
#include "coevo/vcgen.hpp"

using namespace coevo;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int line_starting(const std::vector<std::string>& ls, const std::string& prefix) {
    for (size_t i = 0; i < ls.size(); ++i)
        if (trim(ls[i]).rfind(prefix, 0) == 0) return static_cast<int>(i) + 1;
    return 0;
}

int pick(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

std::string lit(std::mt19937_64& rng, int bound) {
    int v = pick(rng, 2 * bound + 1) - bound;
    return v < 0 ? "(" + std::to_string(v) + ")" : std::to_string(v);
}

const char* const kCmp[] = {"<", "<=", "==", "!=", ">", ">="};

std::string term(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
    int c = pick(rng, depth > 0 ? 5 : 3);
    if (c == 0) return lit(rng, 2);
    if (c <= 2) return vars[pick(rng, static_cast<int>(vars.size()))];
    auto op = c == 3 ? " + " : " - ";
    return "(" + term(rng, vars, depth - 1) + op + term(rng, vars, depth - 1) + ")";
}

std::string compare(std::mt19937_64& rng, const std::vector<std::string>& vars) {
    return term(rng, vars, 1) + " " + kCmp[pick(rng, 6)] + " " + term(rng, vars, 1);
}

std::string stmts(std::mt19937_64& rng, const std::string& ind, std::vector<std::string>& r_values) {
    std::string out;
    int n = 1 + pick(rng, 2);
    for (int i = 0; i < n; ++i) {
        int c = pick(rng, 4);
        if (c <= 1) {
            auto e = term(rng, {"x", "y"}, 1);
            r_values.push_back(e);
            out += ind + "r := " + e + ";\n";
        } else if (c == 2) {
            out += ind + "t := " + term(rng, {"x", "y", "t"}, 1) + ";\n";
        } else {
            out += ind + "assert " + compare(rng, {"x", "y", "t", "r"}) + ";\n";
        }
    }
    return out;
}

std::string branch(std::mt19937_64& rng, std::vector<std::string>& r_values) {
    std::string out = "  if " + compare(rng, {"x", "y", "t"}) + " {\n" + stmts(rng, "    ", r_values) + "  }";
    if (pick(rng, 10) < 7) out += " else {\n" + stmts(rng, "    ", r_values) + "  }";
    return out + "\n";
}

ExprPtr wp(const Block& b, ExprPtr q);

ExprPtr wp_stmt(const Stmt& s, ExprPtr q) {
    if (auto* d = std::get_if<VarDecl>(&s.node)) {
        if (!d->init) return q;
        return substitute(q, {{d->name, std::get<ExprPtr>(*d->init)}});
    }
    if (auto* a = std::get_if<Assign>(&s.node)) return substitute(q, {{a->target, std::get<ExprPtr>(a->value)}});
    if (auto* a = std::get_if<Assert>(&s.node)) return mk_and(a->expr, q);
    if (auto* a = std::get_if<Assume>(&s.node)) return mk_implies(a->expr, q);
    if (auto* i = std::get_if<If>(&s.node)) {
        auto t = wp(i->then_block, q);
        auto e = i->else_block ? wp(*i->else_block, q) : q;
        return mk_and(mk_implies(i->cond, t), mk_implies(mk_not(i->cond), e));
    }
    throw std::runtime_error("unsupported statement in generated method");
}

ExprPtr wp(const Block& b, ExprPtr q) {
    for (auto it = b.rbegin(); it != b.rend(); ++it) q = wp_stmt(*it, q);
    return q;
}

ExprPtr quantified(std::mt19937_64& rng) {
    auto range = mk_chain({mk_int(0), mk_var("i"), mk_len(mk_var("a"))}, {BinOp::Le, BinOp::Lt});
    static const BinOp ops[] = {BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Gt, BinOp::Ge};
    ExprPtr rhs = pick(rng, 3) == 0 ? mk_var("i") : pick(rng, 2) ? mk_var("x") : mk_int(pick(rng, 5) - 2);
    auto body = mk_bin(ops[pick(rng, 6)], mk_index(mk_var("a"), mk_var("i")), rhs);
    if (pick(rng, 2)) return mk_quant(QuantKind::Forall, "i", mk_implies(range, body));
    return mk_quant(QuantKind::Exists, "i", mk_and(range, body));
}

ExprPtr int_term(std::mt19937_64& rng) {
    switch (pick(rng, 6)) {
        case 0: return mk_var("x");
        case 1: return mk_var("y");
        case 2: return mk_int(pick(rng, 7) - 3);
        case 3: return mk_len(mk_var("a"));
        case 4: return mk_bin(BinOp::Add, mk_var("x"), mk_var("y"));
        default: return mk_bin(BinOp::Sub, mk_var("x"), mk_int(pick(rng, 3) + 1));
    }
}

}  // namespace

std::string expected_verify_panel(const std::string& source) {
    auto ls = lines_of(source);
    int post_odd = line_starting(ls, "ensures arr[odd]");
    int post_first = line_starting(ls, "ensures forall");
    int start = line_starting(ls, "{");
    std::ostringstream os;
    os << "line " << post_odd << ": Error 1: index out of range.\n";
    os << "line " << post_first << ": Error 2: index out of range.\n";
    os << "line " << start << ": Error 3: A postcondition might not hold on this path.\n";
    os << "line " << post_odd << ": This is the postcondition that might not hold.\n";
    return os.str();
}

std::vector<ClausePatch> expected_repair_patches() {
    return {
        {"arr[odd] %2 != 0", "0 <= odd < arr.Length ==> arr[odd] %2 != 0"},
        {"forall i::0 <= i < odd ==> arr[i] % 2 == 0",
         "0 <= odd < arr.Length ==> (forall i::0 <= i < odd ==> arr[i] % 2 == 0)"},
    };
}

std::string expected_all_even_clause() { return "(forall i :: 0 <= i< arr.Length ==> arr[i] % 2 == 0) ==> odd == -1"; }

std::string expected_all_even_length_clause() {
    return "(forall i :: 0 <= i< arr.Length ==> arr[i] % 2 == 0) ==> odd == -arr.Length";
}

std::string expected_length_init() { return "-arr.Length"; }

std::string random_method(std::mt19937_64& rng) {
    std::vector<std::string> r_values;
    std::string body = "  var t := " + term(rng, {"x", "y"}, 1) + ";\n";
    auto r0 = term(rng, {"x", "y"}, 1);
    r_values.push_back(r0);
    body += "  r := " + r0 + ";\n";
    body += branch(rng, r_values);
    if (pick(rng, 2)) body += branch(rng, r_values);
    if (pick(rng, 10) < 3) body += "  assert " + compare(rng, {"x", "y", "t", "r"}) + ";\n";
    std::string spec;
    if (pick(rng, 2)) spec += "  requires " + compare(rng, {"x", "y"}) + "\n";
    if (pick(rng, 2)) {
        std::string any;
        for (auto& v : r_values) any += (any.empty() ? "" : " || ") + std::string("r == ") + v;
        spec += "  ensures " + any + "\n";
    } else {
        spec += "  ensures " + compare(rng, {"x", "y", "r"}) + "\n";
    }
    if (pick(rng, 4) == 0) spec += "  ensures " + compare(rng, {"x", "y", "r"}) + "\n";
    return "method M(x: int, y: int) returns (r: int)\n" + spec + "{\n" + body + "}\n";
}

bool wp_valid(const Method& m, int lo, int hi) {
    std::vector<ExprPtr> pre, post;
    for (auto& c : m.requires_) pre.push_back(c.expr);
    for (auto& c : m.ensures) post.push_back(c.expr);
    auto vc = mk_implies(conj(pre), wp(*m.body, conj(post)));
    for (std::int64_t x = lo; x <= hi; ++x)
        for (std::int64_t y = lo; y <= hi; ++y)
            if (!evaluate(*vc, {{"x", x}, {"y", y}})) return false;
    return true;
}

ExprPtr random_formula(std::mt19937_64& rng, int depth) {
    static const BinOp cmp[] = {BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Gt, BinOp::Ge};
    if (depth == 0 || pick(rng, 4) == 0) {
        switch (pick(rng, 5)) {
            case 0: return mk_var("b");
            case 1: return quantified(rng);
            default: return mk_bin(cmp[pick(rng, 6)], int_term(rng), int_term(rng));
        }
    }
    switch (pick(rng, 4)) {
        case 0: return mk_not(random_formula(rng, depth - 1));
        case 1: return mk_bin(BinOp::And, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 2: return mk_bin(BinOp::Or, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        default: return mk_implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    }
}

VarTypes formula_types() { return {{"x", Type::Int}, {"y", Type::Int}, {"b", Type::Bool}, {"a", Type::IntArray}}; }

std::vector<std::string> hard_violations(const Admission& a, Solver& solver) {
    std::vector<std::string> out;
    std::set<std::string> child_lines;
    for (auto& l : lines_of(a.child)) child_lines.insert(trim(l));
    for (auto& l : lines_of(a.parent))
        if ((l.find("{:trusted}") != std::string::npos || l.find("@trust") != std::string::npos) &&
            !child_lines.count(trim(l)))
            out.push_back("trusted line changed: " + trim(l));
    auto child = parse_program(a.child);
    auto parts = vc_gen(child);
    for (auto& f : a.hard_before) {
        if (!f.whole_vc || f.anchor.empty()) continue;
        for (auto& p : parts) {
            if (p.anchor != f.anchor) continue;
            if (solver.check(p.vc, p.types).status != VerdictStatus::Valid)
                out.push_back("line " + std::to_string(f.prov.line) + " no longer holds: " + f.anchor);
        }
    }
    return out;
}

std::string random_post_atom(std::mt19937_64& rng) {
    static const char* rhs[] = {"-1", "0", "1", "2", "-2", "arr.Length", "-arr.Length", "arr.Length - 1", "-3"};
    auto atom = [&] { return std::string("odd ") + kCmp[pick(rng, 6)] + " " + rhs[pick(rng, 9)]; };
    switch (pick(rng, 4)) {
        case 0: return atom() + " || " + atom();
        case 1: return atom() + " ==> " + atom();
        default: return atom();
    }
}
