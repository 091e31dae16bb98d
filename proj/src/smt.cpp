#include <functional>
#include <sstream>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/quant.hpp"
#include "coevo/solver.hpp"
#include "coevo/subprocess.hpp"

namespace coevo {

namespace {

std::string sym(const std::string& n) { return "|" + n + "|"; }
std::string len_sym(const std::string& n) { return "|" + n + ".len|"; }

std::string num(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

class Emitter {
public:
    explicit Emitter(const VarTypes& t) : types_(t) {}

    std::string term(const Expr& e) {
        return std::visit(
            [&](const auto& x) -> std::string {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) return num(x.value);
                else if constexpr (std::is_same_v<T, BoolLit>) return x.value ? "true" : "false";
                else if constexpr (std::is_same_v<T, VarRef>) return sym(x.name);
                else if constexpr (std::is_same_v<T, Unary>) {
                    return std::string(x.op == UnOp::Not ? "(not " : "(- ") + term(*x.operand) + ")";
                } else if constexpr (std::is_same_v<T, Binary>) {
                    return binary(x);
                } else if constexpr (std::is_same_v<T, Chain>) {
                    std::string r = "(and";
                    for (size_t i = 0; i + 1 < x.operands.size(); ++i)
                        r += " (" + std::string(cmp(x.ops[i])) + " " + term(*x.operands[i]) + " " +
                             term(*x.operands[i + 1]) + ")";
                    return r + ")";
                } else if constexpr (std::is_same_v<T, Length>) {
                    return length(*x.array);
                } else if constexpr (std::is_same_v<T, Index>) {
                    std::string i = term(*x.index);
                    std::string guard = "(and (<= 0 " + i + ") (< " + i + " " + length(*x.array) + "))";
                    return "(ite " + guard + " " + select(*x.array, i) + " 0)";
                } else if constexpr (std::is_same_v<T, Quantifier>) {
                    return std::string("(") + (x.kind == QuantKind::Forall ? "forall" : "exists") + " ((" +
                           sym(x.var) + " Int)) " + term(*x.body) + ")";
                } else if constexpr (std::is_same_v<T, Presence>) {
                    throw EvalError("unresolved presence marker " + x.label);
                } else {
                    throw EvalError("array value in scalar position");
                }
            },
            e.node);
    }

private:
    const VarTypes& types_;
    int fresh_ = 0;

    static const char* cmp(BinOp op) {
        switch (op) {
            case BinOp::Lt: return "<";
            case BinOp::Le: return "<=";
            case BinOp::Gt: return ">";
            case BinOp::Ge: return ">=";
            default: return "=";
        }
    }

    bool is_array(const Expr& e) const {
        if (std::holds_alternative<ArrayLit>(e.node) || std::holds_alternative<NullLit>(e.node)) return true;
        if (auto* v = std::get_if<VarRef>(&e.node)) {
            auto it = types_.find(v->name);
            return it != types_.end() && it->second == Type::IntArray;
        }
        return false;
    }

    std::string length(const Expr& a) {
        if (auto* v = std::get_if<VarRef>(&a.node)) return len_sym(v->name);
        if (auto* l = std::get_if<ArrayLit>(&a.node)) return std::to_string(l->elems.size());
        throw EvalError("unsupported array expression");
    }

    std::string select(const Expr& a, const std::string& i) {
        if (auto* v = std::get_if<VarRef>(&a.node)) return "(select " + sym(v->name) + " " + i + ")";
        if (auto* l = std::get_if<ArrayLit>(&a.node)) {
            std::string r = "0";
            for (size_t k = l->elems.size(); k-- > 0;)
                r = "(ite (= " + i + " " + std::to_string(k) + ") " + term(*l->elems[k]) + " " + r + ")";
            return r;
        }
        throw EvalError("unsupported array expression");
    }

    std::string array_eq(const Expr& a, const Expr& b) {
        if (std::holds_alternative<NullLit>(a.node) || std::holds_alternative<NullLit>(b.node))
            return std::holds_alternative<NullLit>(a.node) && std::holds_alternative<NullLit>(b.node) ? "true"
                                                                                                       : "false";
        std::string k = "|k!" + std::to_string(fresh_++) + "|";
        std::string la = length(a);
        return "(and (= " + la + " " + length(b) + ") (forall ((" + k + " Int)) (=> (and (<= 0 " + k + ") (< " + k +
               " " + la + ")) (= " + select(a, k) + " " + select(b, k) + "))))";
    }

    std::string binary(const Binary& x) {
        switch (x.op) {
            case BinOp::Eq: case BinOp::Ne: {
                std::string e;
                if (is_array(*x.lhs) || is_array(*x.rhs)) e = array_eq(*x.lhs, *x.rhs);
                else e = "(= " + term(*x.lhs) + " " + term(*x.rhs) + ")";
                return x.op == BinOp::Eq ? e : "(not " + e + ")";
            }
            default: break;
        }
        const char* op = "";
        switch (x.op) {
            case BinOp::Add: op = "+"; break;
            case BinOp::Sub: op = "-"; break;
            case BinOp::Mul: op = "*"; break;
            case BinOp::Div: op = "div"; break;
            case BinOp::Mod: op = "mod"; break;
            case BinOp::Lt: op = "<"; break;
            case BinOp::Le: op = "<="; break;
            case BinOp::Gt: op = ">"; break;
            case BinOp::Ge: op = ">="; break;
            case BinOp::And: op = "and"; break;
            case BinOp::Or: op = "or"; break;
            case BinOp::Implies: op = "=>"; break;
            case BinOp::Iff: op = "="; break;
            default: break;
        }
        return std::string("(") + op + " " + term(*x.lhs) + " " + term(*x.rhs) + ")";
    }
};

// s-expressions for model replies
struct SExp {
    std::string atom;
    std::vector<SExp> list;
    bool is_atom = true;
};

class SParser {
public:
    explicit SParser(const std::string& s) : s_(s) {}

    bool done() {
        skip();
        return i_ >= s_.size();
    }

    SExp next() {
        skip();
        if (i_ >= s_.size()) throw MalformedModel("unexpected end of solver reply");
        SExp e;
        if (s_[i_] == '(') {
            ++i_;
            e.is_atom = false;
            for (;;) {
                skip();
                if (i_ >= s_.size()) throw MalformedModel("unbalanced parentheses in solver reply");
                if (s_[i_] == ')') {
                    ++i_;
                    break;
                }
                e.list.push_back(next());
            }
            return e;
        }
        if (s_[i_] == ')') throw MalformedModel("unexpected ')' in solver reply");
        if (s_[i_] == '|') {
            auto j = s_.find('|', i_ + 1);
            if (j == std::string::npos) throw MalformedModel("unterminated symbol in solver reply");
            e.atom = s_.substr(i_ + 1, j - i_ - 1);
            i_ = j + 1;
            return e;
        }
        if (s_[i_] == '"') {
            auto j = s_.find('"', i_ + 1);
            if (j == std::string::npos) throw MalformedModel("unterminated string in solver reply");
            e.atom = s_.substr(i_, j - i_ + 1);
            i_ = j + 1;
            return e;
        }
        size_t j = i_;
        while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
        e.atom = s_.substr(i_, j - i_);
        i_ = j;
        return e;
    }

private:
    const std::string& s_;
    size_t i_ = 0;
    void skip() {
        while (i_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
            else if (s_[i_] == ';') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
            } else break;
        }
    }
};

struct MVal {
    enum { Int, Bool, Arr } k = Int;
    std::int64_t i = 0;
    std::function<std::int64_t(std::int64_t)> fn;
};

struct Fun {
    std::vector<std::string> params;
    SExp body;
};

class ModelEval {
public:
    std::map<std::string, Fun> funs;

    MVal eval(const SExp& e, const std::map<std::string, MVal>& locals) {
        if (e.is_atom) {
            if (e.atom == "true") return {MVal::Bool, 1, {}};
            if (e.atom == "false") return {MVal::Bool, 0, {}};
            if (!e.atom.empty() && (std::isdigit(static_cast<unsigned char>(e.atom[0]))))
                return {MVal::Int, std::stoll(e.atom), {}};
            auto l = locals.find(e.atom);
            if (l != locals.end()) return l->second;
            auto f = funs.find(e.atom);
            if (f != funs.end() && f->second.params.empty()) return eval(f->second.body, {});
            throw MalformedModel("unknown symbol in model: " + e.atom);
        }
        if (e.list.empty()) throw MalformedModel("empty application in model");
        auto& h = e.list[0];
        if (!h.is_atom) {
            // ((as const (Array Int Int)) v)
            if (h.list.size() >= 2 && h.list[0].atom == "as" && h.list[1].atom == "const" && e.list.size() == 2) {
                auto v = eval(e.list[1], locals).i;
                return {MVal::Arr, 0, [v](std::int64_t) { return v; }};
            }
            throw MalformedModel("unsupported model term");
        }
        const std::string& op = h.atom;
        auto arg = [&](size_t k) { return eval(e.list.at(k), locals); };
        if (op == "-" && e.list.size() == 2) return {MVal::Int, -arg(1).i, {}};
        if (op == "-") return {MVal::Int, arg(1).i - arg(2).i, {}};
        if (op == "+") {
            std::int64_t s = 0;
            for (size_t k = 1; k < e.list.size(); ++k) s += arg(k).i;
            return {MVal::Int, s, {}};
        }
        if (op == "*") {
            std::int64_t s = 1;
            for (size_t k = 1; k < e.list.size(); ++k) s *= arg(k).i;
            return {MVal::Int, s, {}};
        }
        if (op == "ite") return arg(1).i ? arg(2) : arg(3);
        if (op == "=") {
            auto a = arg(1), b = arg(2);
            return {MVal::Bool, a.i == b.i, {}};
        }
        if (op == "not") return {MVal::Bool, !arg(1).i, {}};
        if (op == "and" || op == "or") {
            bool is_and = op == "and";
            bool r = is_and;
            for (size_t k = 1; k < e.list.size(); ++k) {
                bool b = arg(k).i != 0;
                r = is_and ? (r && b) : (r || b);
            }
            return {MVal::Bool, r, {}};
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            auto a = arg(1).i, b = arg(2).i;
            bool r = op == "<" ? a < b : op == "<=" ? a <= b : op == ">" ? a > b : a >= b;
            return {MVal::Bool, r, {}};
        }
        if (op == "store") {
            auto base = arg(1);
            auto idx = arg(2).i;
            auto v = arg(3).i;
            auto f = base.fn;
            return {MVal::Arr, 0, [f, idx, v](std::int64_t x) { return x == idx ? v : f(x); }};
        }
        if (op == "select") {
            auto a = arg(1);
            return {MVal::Int, a.fn(arg(2).i), {}};
        }
        if (op == "lambda") {
            auto& ps = e.list.at(1).list;
            if (ps.size() != 1) throw MalformedModel("unsupported lambda arity");
            std::string p = ps[0].list.at(0).atom;
            SExp body = e.list.at(2);
            auto captured = locals;
            return {MVal::Arr, 0, [this, p, body, captured](std::int64_t x) mutable {
                        captured[p] = {MVal::Int, x, {}};
                        return eval(body, captured).i;
                    }};
        }
        if (op == "_" && e.list.size() == 3 && e.list[1].atom == "as-array") {
            std::string fname = e.list[2].atom;
            return {MVal::Arr, 0, [this, fname](std::int64_t x) {
                        auto& f = funs.at(fname);
                        return eval(f.body, {{f.params.at(0), {MVal::Int, x, {}}}}).i;
                    }};
        }
        auto f = funs.find(op);
        if (f != funs.end()) {
            std::map<std::string, MVal> ls;
            for (size_t k = 0; k < f->second.params.size(); ++k) ls[f->second.params[k]] = arg(k + 1);
            return eval(f->second.body, ls);
        }
        throw MalformedModel("unsupported model operator " + op);
    }
};

}  // namespace

std::string to_smtlib(const ExprPtr& vc, const VarTypes& types) {
    auto ty = infer_types(*vc, types);
    std::ostringstream os;
    os << "(set-logic ALL)\n";
    for (auto& v : free_vars(*vc)) {
        switch (ty.at(v)) {
            case Type::Int: os << "(declare-const " << sym(v) << " Int)\n"; break;
            case Type::Bool: os << "(declare-const " << sym(v) << " Bool)\n"; break;
            case Type::IntArray:
                os << "(declare-const " << sym(v) << " (Array Int Int))\n";
                os << "(declare-const " << len_sym(v) << " Int)\n";
                os << "(assert (>= " << len_sym(v) << " 0))\n";
                break;
        }
    }
    Emitter em(ty);
    os << "(assert (not " << em.term(*vc) << "))\n";
    os << "(check-sat)\n(get-model)\n";
    return os.str();
}

Env parse_smt_model(const std::string& reply, const VarTypes& types) {
    SParser sp(reply);
    ModelEval me;
    while (!sp.done()) {
        SExp e = sp.next();
        if (e.is_atom) continue;
        std::vector<SExp> defs;
        if (!e.list.empty() && e.list[0].is_atom && e.list[0].atom == "model") defs.assign(e.list.begin() + 1, e.list.end());
        else if (!e.list.empty() && e.list[0].is_atom && e.list[0].atom == "define-fun") defs.push_back(e);
        else defs = e.list;
        for (auto& d : defs) {
            if (d.is_atom || d.list.size() != 5 || d.list[0].atom != "define-fun") continue;
            Fun f;
            for (auto& p : d.list[2].list) f.params.push_back(p.list.at(0).atom);
            f.body = d.list[4];
            me.funs[d.list[1].atom] = f;
        }
    }
    Env env;
    for (auto& [name, t] : types) {
        bool has = me.funs.count(name) > 0;
        switch (t) {
            case Type::Int: env[name] = has ? me.eval(me.funs[name].body, {}).i : std::int64_t{0}; break;
            case Type::Bool: env[name] = has ? me.eval(me.funs[name].body, {}).i != 0 : false; break;
            case Type::IntArray: {
                std::int64_t len = 0;
                if (me.funs.count(name + ".len")) len = me.eval(me.funs[name + ".len"].body, {}).i;
                if (len < 0 || len > 1'000'000) throw MalformedModel("implausible array length for " + name);
                std::vector<std::int64_t> a;
                if (has) {
                    auto arr = me.eval(me.funs[name].body, {});
                    if (arr.k != MVal::Arr) throw MalformedModel("array expected for " + name);
                    for (std::int64_t k = 0; k < len; ++k) a.push_back(arr.fn(k));
                } else {
                    a.assign(static_cast<size_t>(len), 0);
                }
                env[name] = a;
                break;
            }
        }
    }
    return env;
}

Verdict check_smt(const ExprPtr& vc, const VarTypes& types, const std::string& cmd, int timeout_ms) {
    auto start = std::chrono::steady_clock::now();
    auto ty = infer_types(*vc, types);
    std::string script = to_smtlib(vc, ty);
    auto res = run_process(cmd, script, timeout_ms);
    Verdict v;
    v.backend = Backend::Smt;
    v.elapsed = std::chrono::steady_clock::now() - start;
    if (res.timed_out) {
        v.status = VerdictStatus::Unknown;
        v.note = "timeout";
        return v;
    }
    if (res.exit_status == 127 || res.exit_status == 126) throw BackendUnavailable("cannot run solver: " + cmd);
    std::istringstream is(res.out);
    std::string first;
    is >> first;
    if (first == "unsat") {
        v.status = VerdictStatus::Valid;
    } else if (first == "sat") {
        v.status = VerdictStatus::Invalid;
        std::string rest = res.out.substr(res.out.find("sat") + 3);
        VarTypes fv;
        for (auto& n : free_vars(*vc)) fv[n] = ty.at(n);
        v.witness = parse_smt_model(rest, fv);
    } else if (first == "unknown" || first == "timeout") {
        v.status = VerdictStatus::Unknown;
        v.note = first;
    } else {
        throw MalformedModel("unexpected solver reply: " + res.out.substr(0, 200) + res.err.substr(0, 200));
    }
    return v;
}

}  // namespace coevo
