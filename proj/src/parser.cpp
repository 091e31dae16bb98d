#include "coevo/parser.hpp"

#include <cctype>
#include <map>
#include <set>

#include "coevo/errors.hpp"
#include "coevo/expr.hpp"
#include "coevo/quant.hpp"

namespace coevo {

const Method* Program::find(const std::string& name) const {
    for (auto& m : methods)
        if (m.name == name) return &m;
    return nullptr;
}

namespace {

enum class Tok { Ident, Int, Punct, AttrOpen, End };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
    SourcePos end;
};

enum class LineMark { None, User, Patched };

struct Lexed {
    std::vector<Token> toks;
    std::map<int, LineMark> marks;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Lexed lex(const std::string& src) {
    Lexed out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* puncts[] = {"<==>", "==>", "::", ":=", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{",
                                   "}",    "[",   "]",  ",",  ";",  ":",  "<",  ">",  "+",  "-",  "*",  "/",  "%",
                                   "!",    "."};
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            auto e = src.find('\n', i);
            if (e == std::string::npos) e = src.size();
            std::string text = trim(src.substr(i, e - i));
            if (text == kPatchedMarker) out.marks[line] = LineMark::Patched;
            else if (text == "// {:trusted}" || text == "// @trust") {
                if (out.marks[line] != LineMark::Patched) out.marks[line] = LineMark::User;
            }
            adv(e - i);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            auto e = src.find("*/", i + 2);
            if (e == std::string::npos) throw SyntaxError("unterminated comment", {{line, col}, {line, col}});
            adv(e + 2 - i);
            continue;
        }
        SourcePos p{line, col};
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            std::string t = src.substr(i, j - i);
            adv(j - i);
            out.toks.push_back({Tok::Int, t, p, {line, col}});
            continue;
        }
        if (is_ident_start(c)) {
            size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            std::string t = src.substr(i, j - i);
            adv(j - i);
            out.toks.push_back({Tok::Ident, t, p, {line, col}});
            continue;
        }
        if (c == '{' && i + 1 < src.size() && src[i + 1] == ':' && (i + 2 >= src.size() || src[i + 2] != ':')) {
            adv(2);
            out.toks.push_back({Tok::AttrOpen, "{:", p, {line, col}});
            continue;
        }
        bool matched = false;
        for (auto* pu : puncts) {
            std::string ps(pu);
            if (src.compare(i, ps.size(), ps) == 0) {
                adv(ps.size());
                out.toks.push_back({Tok::Punct, ps, p, {line, col}});
                matched = true;
                break;
            }
        }
        if (!matched) throw SyntaxError(std::string("unexpected character '") + c + "'", {p, p});
    }
    out.toks.push_back({Tok::End, "", {line, col}, {line, col}});
    return out;
}

const std::set<std::string> kKeywords = {"method", "returns", "requires", "ensures", "var",   "if",     "else",
                                         "while",  "for",     "to",       "invariant", "decreases", "assert",
                                         "assume", "break",   "true",     "false", "null",  "new",    "int",
                                         "bool",   "array",   "forall",   "exists"};

class Parser {
public:
    explicit Parser(const std::string& src) : lx_(lex(src)) {}

    Program program(const std::string& name) {
        Program p;
        p.source_name = name;
        while (!at_end()) p.methods.push_back(method());
        std::set<std::string> seen;
        for (auto& m : p.methods)
            if (!seen.insert(m.name).second) throw TypeError("duplicate method " + m.name, m.span);
        return p;
    }

    ExprPtr lone_expr() {
        auto e = expr();
        if (!at_end()) fail("unexpected token '" + peek().text + "'");
        return e;
    }

private:
    Lexed lx_;
    size_t pos_ = 0;
    int next_id_ = 0;

    const Token& peek(size_t k = 0) const { return lx_.toks[std::min(pos_ + k, lx_.toks.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }
    const Token& take() { return lx_.toks[pos_ < lx_.toks.size() - 1 ? pos_++ : pos_]; }
    SourcePos last_end() const { return pos_ ? lx_.toks[pos_ - 1].end : SourcePos{1, 1}; }

    [[noreturn]] void fail(const std::string& msg) const {
        auto& t = peek();
        throw SyntaxError(msg, {t.pos, t.end});
    }

    bool is(const char* text) const {
        auto& t = peek();
        return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == text;
    }
    bool accept(const char* text) {
        if (is(text)) {
            take();
            return true;
        }
        return false;
    }
    void expect(const char* text) {
        if (!accept(text)) fail(std::string("expected '") + text + "' but found '" + peek().text + "'");
    }
    std::string ident() {
        auto& t = peek();
        if (t.kind != Tok::Ident || kKeywords.count(t.text)) fail("expected identifier but found '" + t.text + "'");
        return take().text;
    }

    StmtId fresh_id() { return StmtId{next_id_++}; }

    bool attribute() {
        bool trusted = false;
        while (peek().kind == Tok::AttrOpen) {
            take();
            auto name = ident();
            if (name == "trusted") trusted = true;
            expect("}");
        }
        return trusted;
    }

    TrustTag trust_for(bool attr, int l0, int l1) const {
        TrustTag t;
        t.trusted = attr;
        for (auto it = lx_.marks.lower_bound(l0); it != lx_.marks.end() && it->first <= l1; ++it) {
            if (it->second == LineMark::Patched) {
                t.trusted = true;
                t.origin = TrustOrigin::Patched;
            } else if (it->second == LineMark::User && !t.patched()) {
                t.trusted = true;
            }
        }
        return t;
    }

    Type type() {
        if (accept("int")) return Type::Int;
        if (accept("bool")) return Type::Bool;
        if (accept("array")) {
            expect("<");
            expect("int");
            expect(">");
            return Type::IntArray;
        }
        fail("expected type");
    }

    std::vector<Param> params() {
        std::vector<Param> ps;
        if (is(")")) return ps;
        do {
            Param p;
            p.name = ident();
            expect(":");
            p.type = type();
            ps.push_back(p);
        } while (accept(","));
        return ps;
    }

    Clause clause() {
        Clause c;
        c.id = fresh_id();
        int l0 = peek().pos.line;
        SourcePos b = peek().pos;
        take();
        bool attr = attribute();
        c.expr = expr();
        accept(";");
        c.span = {b, last_end()};
        c.trust = trust_for(attr, l0, c.span.end.line);
        return c;
    }

    Method method() {
        Method m;
        SourcePos b = peek().pos;
        expect("method");
        m.id = fresh_id();
        bool attr = attribute();
        m.name = ident();
        expect("(");
        m.params = params();
        expect(")");
        if (accept("returns")) {
            expect("(");
            m.returns = params();
            expect(")");
        }
        m.trust = trust_for(attr, b.line, last_end().line);
        while (is("requires") || is("ensures")) {
            bool req = is("requires");
            auto c = clause();
            (req ? m.requires_ : m.ensures).push_back(std::move(c));
        }
        if (is("{")) {
            m.body_line = peek().pos.line;
            take();
            m.body = block_until_close();
        }
        m.span = {b, last_end()};
        return m;
    }

    Block block_until_close() {
        Block b;
        while (!accept("}")) {
            if (at_end()) fail("expected '}'");
            b.push_back(stmt());
        }
        return b;
    }

    Block braced() {
        expect("{");
        return block_until_close();
    }

    Rhs rhs() {
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text) && peek(1).kind == Tok::Punct &&
            peek(1).text == "(") {
            Call c;
            c.callee = take().text;
            take();
            if (!is(")")) {
                do c.args.push_back(expr());
                while (accept(","));
            }
            expect(")");
            return c;
        }
        return expr();
    }

    void loop_specs(std::vector<Clause>& invs, std::optional<Clause>& dec) {
        while (is("invariant") || is("decreases")) {
            bool inv = is("invariant");
            auto c = clause();
            if (inv) invs.push_back(std::move(c));
            else dec = std::move(c);
        }
    }

    Stmt stmt() {
        Stmt s;
        SourcePos b = peek().pos;
        s.id = fresh_id();
        auto finish_simple = [&](bool attr) {
            s.span = {b, last_end()};
            s.trust = trust_for(attr, b.line, s.span.end.line);
        };
        if (accept("var")) {
            bool attr = attribute();
            VarDecl d;
            d.name = ident();
            if (accept(":")) d.type = type();
            if (accept(":=")) d.init = rhs();
            expect(";");
            s.node = std::move(d);
            finish_simple(attr);
        } else if (accept("assert")) {
            bool attr = attribute();
            Assert a{expr()};
            expect(";");
            s.node = std::move(a);
            finish_simple(attr);
        } else if (accept("assume")) {
            bool attr = attribute();
            Assume a{expr()};
            expect(";");
            s.node = std::move(a);
            finish_simple(attr);
        } else if (accept("break")) {
            expect(";");
            s.node = Break{};
            finish_simple(false);
        } else if (is("if")) {
            return if_stmt(s);
        } else if (accept("while")) {
            bool attr = attribute();
            While w;
            w.guard = expr();
            s.trust = trust_for(attr, b.line, last_end().line);
            loop_specs(w.invariants, w.decreases);
            w.body = braced();
            s.node = std::move(w);
            s.span = {b, last_end()};
        } else if (accept("for")) {
            bool attr = attribute();
            For f;
            f.var = ident();
            expect(":=");
            f.lo = expr();
            expect("to");
            f.hi = expr();
            s.trust = trust_for(attr, b.line, last_end().line);
            loop_specs(f.invariants, f.decreases);
            f.body = braced();
            s.node = std::move(f);
            s.span = {b, last_end()};
        } else if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
            Assign a;
            a.target = take().text;
            expect(":=");
            a.value = rhs();
            expect(";");
            s.node = std::move(a);
            finish_simple(false);
        } else {
            fail("expected statement but found '" + peek().text + "'");
        }
        return s;
    }

    Stmt if_stmt(Stmt& s) {
        SourcePos b = peek().pos;
        expect("if");
        bool attr = attribute();
        If n;
        n.cond = expr();
        int hl = peek().pos.line;
        s.trust = trust_for(attr, b.line, hl);
        n.then_block = braced();
        if (accept("else")) {
            if (is("if")) {
                Stmt inner;
                inner.id = fresh_id();
                Block eb;
                eb.push_back(if_stmt(inner));
                n.else_block = std::move(eb);
            } else {
                n.else_block = braced();
            }
        }
        s.node = std::move(n);
        s.span = {b, last_end()};
        return std::move(s);
    }

    // expressions
    ExprPtr expr() { return iff(); }

    ExprPtr iff() {
        SourcePos b = peek().pos;
        auto l = implies();
        while (accept("<==>")) l = mk_bin(BinOp::Iff, l, implies(), {b, last_end()});
        return l;
    }

    ExprPtr implies() {
        SourcePos b = peek().pos;
        auto l = disj();
        if (accept("==>")) return mk_bin(BinOp::Implies, l, implies(), {b, last_end()});
        return l;
    }

    ExprPtr disj() {
        SourcePos b = peek().pos;
        auto l = conj_();
        while (accept("||")) l = mk_bin(BinOp::Or, l, conj_(), {b, last_end()});
        return l;
    }

    ExprPtr conj_() {
        SourcePos b = peek().pos;
        auto l = cmp();
        while (accept("&&")) l = mk_bin(BinOp::And, l, cmp(), {b, last_end()});
        return l;
    }

    std::optional<BinOp> cmp_op() const {
        static const std::pair<const char*, BinOp> ops[] = {{"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
                                                            {">=", BinOp::Ge}, {"<", BinOp::Lt},   {">", BinOp::Gt}};
        if (peek().kind != Tok::Punct) return std::nullopt;
        for (auto& [t, op] : ops)
            if (peek().text == t) return op;
        return std::nullopt;
    }

    ExprPtr cmp() {
        SourcePos b = peek().pos;
        std::vector<ExprPtr> xs{add()};
        std::vector<BinOp> ops;
        while (auto op = cmp_op()) {
            SourcePos at = peek().pos;
            take();
            ops.push_back(*op);
            xs.push_back(add());
            if (ops.size() > 1) {
                auto up = [](BinOp o) { return o == BinOp::Lt || o == BinOp::Le; };
                auto down = [](BinOp o) { return o == BinOp::Gt || o == BinOp::Ge; };
                bool ok = (up(ops[0]) && up(ops.back())) || (down(ops[0]) && down(ops.back()));
                if (!ok) throw SyntaxError("comparison chain must be monotone", {at, at});
            }
        }
        if (ops.empty()) return xs[0];
        if (ops.size() == 1) return mk_bin(ops[0], xs[0], xs[1], {b, last_end()});
        return mk_chain(std::move(xs), std::move(ops), {b, last_end()});
    }

    ExprPtr add() {
        SourcePos b = peek().pos;
        auto l = mul();
        for (;;) {
            if (accept("+")) l = mk_bin(BinOp::Add, l, mul(), {b, last_end()});
            else if (accept("-")) l = mk_bin(BinOp::Sub, l, mul(), {b, last_end()});
            else return l;
        }
    }

    ExprPtr mul() {
        SourcePos b = peek().pos;
        auto l = unary();
        for (;;) {
            if (accept("*")) l = mk_bin(BinOp::Mul, l, unary(), {b, last_end()});
            else if (accept("/")) l = mk_bin(BinOp::Div, l, unary(), {b, last_end()});
            else if (accept("%")) l = mk_bin(BinOp::Mod, l, unary(), {b, last_end()});
            else return l;
        }
    }

    ExprPtr unary() {
        SourcePos b = peek().pos;
        if (accept("!")) return mk_un(UnOp::Not, unary(), {b, last_end()});
        if (accept("-")) {
            if (peek().kind == Tok::Int) {
                auto v = std::stoll(take().text);
                return mk_int(-v, {b, last_end()});
            }
            return mk_un(UnOp::Neg, unary(), {b, last_end()});
        }
        if (is("forall") || is("exists")) {
            auto k = take().text == "forall" ? QuantKind::Forall : QuantKind::Exists;
            auto v = ident();
            if (accept(":")) {
                if (type() != Type::Int) fail("quantified variables must be int");
            }
            expect("::");
            auto body = expr();
            return mk_quant(k, v, body, {b, last_end()});
        }
        return postfix();
    }

    ExprPtr postfix() {
        SourcePos b = peek().pos;
        auto e = primary();
        for (;;) {
            if (accept("[")) {
                auto i = expr();
                expect("]");
                e = mk_index(e, i, {b, last_end()});
            } else if (is(".") && peek(1).text == "Length") {
                take();
                take();
                e = mk_len(e, {b, last_end()});
            } else {
                return e;
            }
        }
    }

    ExprPtr primary() {
        auto& t = peek();
        SourcePos b = t.pos;
        if (t.kind == Tok::Int) {
            auto v = std::stoll(take().text);
            return mk_int(v, {b, last_end()});
        }
        if (accept("true")) return mk_bool(true, {b, last_end()});
        if (accept("false")) return mk_bool(false, {b, last_end()});
        if (accept("null")) return mk_null({b, last_end()});
        if (accept("new")) {
            expect("int");
            expect("[");
            expect("]");
            expect("{");
            std::vector<ExprPtr> xs;
            if (!is("}")) {
                do xs.push_back(expr());
                while (accept(","));
            }
            expect("}");
            return mk_array(std::move(xs), {b, last_end()});
        }
        if (accept("(")) {
            auto e = expr();
            expect(")");
            return e;
        }
        if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
            auto n = take().text;
            return mk_var(n, {b, last_end()});
        }
        fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected token '" + t.text + "'");
    }
};

// type checking

enum class TT { Int, Bool, Arr, Null };

TT tt(Type t) {
    switch (t) {
        case Type::Int: return TT::Int;
        case Type::Bool: return TT::Bool;
        case Type::IntArray: return TT::Arr;
    }
    return TT::Int;
}

const char* tname(TT t) {
    switch (t) {
        case TT::Int: return "int";
        case TT::Bool: return "bool";
        case TT::Arr: return "array<int>";
        case TT::Null: return "null";
    }
    return "?";
}

class Checker {
public:
    explicit Checker(const Program* p) : prog_(p) {}

    void method(const Method& m) {
        scopes_.clear();
        push();
        for (auto& p : m.params) declare(p.name, p.type, m.span);
        for (auto& c : m.requires_) formula(*c.expr);
        push();
        for (auto& r : m.returns) declare(r.name, r.type, m.span);
        for (auto& c : m.ensures) formula(*c.expr);
        readonly_.clear();
        for (auto& p : m.params) readonly_.insert(p.name);
        if (m.body) block(*m.body);
    }

    TT expr(const Expr& e) {
        return std::visit(
            [&](const auto& n) -> TT {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, IntLit>) return TT::Int;
                else if constexpr (std::is_same_v<T, BoolLit>) return TT::Bool;
                else if constexpr (std::is_same_v<T, NullLit>) return TT::Null;
                else if constexpr (std::is_same_v<T, Presence>) return TT::Bool;
                else if constexpr (std::is_same_v<T, VarRef>) {
                    auto t = lookup(n.name);
                    if (!t) throw TypeError("unknown identifier " + n.name, e.span);
                    return tt(*t);
                } else if constexpr (std::is_same_v<T, ArrayLit>) {
                    for (auto& x : n.elems) want(*x, TT::Int);
                    return TT::Arr;
                } else if constexpr (std::is_same_v<T, Unary>) {
                    TT w = n.op == UnOp::Not ? TT::Bool : TT::Int;
                    want(*n.operand, w);
                    return w;
                } else if constexpr (std::is_same_v<T, Binary>) {
                    switch (n.op) {
                        case BinOp::Add: case BinOp::Sub: case BinOp::Mul: case BinOp::Div: case BinOp::Mod:
                            want(*n.lhs, TT::Int);
                            want(*n.rhs, TT::Int);
                            return TT::Int;
                        case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
                            want(*n.lhs, TT::Int);
                            want(*n.rhs, TT::Int);
                            return TT::Bool;
                        case BinOp::Eq: case BinOp::Ne: {
                            TT a = expr(*n.lhs), b = expr(*n.rhs);
                            bool ok = a == b ? a != TT::Null
                                             : ((a == TT::Arr && b == TT::Null) || (a == TT::Null && b == TT::Arr));
                            if (!ok)
                                throw TypeError(std::string("cannot compare ") + tname(a) + " with " + tname(b),
                                                e.span);
                            return TT::Bool;
                        }
                        default:
                            want(*n.lhs, TT::Bool);
                            want(*n.rhs, TT::Bool);
                            return TT::Bool;
                    }
                } else if constexpr (std::is_same_v<T, Chain>) {
                    for (auto& x : n.operands) want(*x, TT::Int);
                    return TT::Bool;
                } else if constexpr (std::is_same_v<T, Length>) {
                    want(*n.array, TT::Arr);
                    return TT::Int;
                } else if constexpr (std::is_same_v<T, Index>) {
                    want(*n.array, TT::Arr);
                    want(*n.index, TT::Int);
                    return TT::Int;
                } else if constexpr (std::is_same_v<T, Quantifier>) {
                    if (lookup(n.var)) throw TypeError("quantified variable " + n.var + " is not fresh", e.span);
                    if (!quant_range(n)) throw TypeError("quantifier over " + n.var + " is not bounded", e.span);
                    push();
                    declare(n.var, Type::Int, e.span);
                    want(*n.body, TT::Bool);
                    pop();
                    return TT::Bool;
                }
            },
            e.node);
    }

    void formula(const Expr& e) { want(e, TT::Bool); }

    void block(const Block& b) {
        push();
        for (auto& s : b) stmt(s);
        pop();
    }

    void push() { scopes_.emplace_back(); }
    void pop() { scopes_.pop_back(); }

    void declare(const std::string& n, Type t, Span sp) {
        if (lookup(n)) throw TypeError("redeclaration of " + n, sp);
        scopes_.back()[n] = t;
    }

private:
    const Program* prog_;
    std::vector<std::map<std::string, Type>> scopes_;
    std::set<std::string> readonly_;
    int loop_depth_ = 0;

    std::optional<Type> lookup(const std::string& n) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(n);
            if (f != it->end()) return f->second;
        }
        return std::nullopt;
    }

    void want(const Expr& e, TT w) {
        TT t = expr(e);
        if (t != w) throw TypeError(std::string("expected ") + tname(w) + " but found " + tname(t), e.span);
    }

    TT rhs(const Rhs& r, Span sp) {
        if (auto* e = std::get_if<ExprPtr>(&r)) return expr(**e);
        auto& c = std::get<Call>(r);
        const Method* callee = prog_ ? prog_->find(c.callee) : nullptr;
        if (!callee) throw TypeError("unknown method " + c.callee, sp);
        if (callee->params.size() != c.args.size()) throw TypeError("wrong number of arguments to " + c.callee, sp);
        for (size_t i = 0; i < c.args.size(); ++i) want(*c.args[i], tt(callee->params[i].type));
        if (callee->returns.size() != 1) throw UnsupportedConstruct("calls must return exactly one value", sp);
        return tt(callee->returns[0].type);
    }

    static Type from_tt(TT t, Span sp) {
        switch (t) {
            case TT::Int: return Type::Int;
            case TT::Bool: return Type::Bool;
            case TT::Arr: return Type::IntArray;
            default: throw TypeError("cannot infer type", sp);
        }
    }

    void stmt(const Stmt& s) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, VarDecl>) {
                    std::optional<Type> t = n.type;
                    if (n.init) {
                        TT r = rhs(*n.init, s.span);
                        if (t && tt(*t) != r && !(r == TT::Null && *t == Type::IntArray))
                            throw TypeError("initializer type mismatch for " + n.name, s.span);
                        if (!t) t = from_tt(r, s.span);
                    }
                    if (!t) throw TypeError("cannot infer type of " + n.name, s.span);
                    declare(n.name, *t, s.span);
                } else if constexpr (std::is_same_v<T, Assign>) {
                    auto t = lookup(n.target);
                    if (!t) throw TypeError("unknown identifier " + n.target, s.span);
                    if (readonly_.count(n.target)) throw TypeError("cannot assign to " + n.target, s.span);
                    if (rhs(n.value, s.span) != tt(*t)) throw TypeError("assignment type mismatch", s.span);
                } else if constexpr (std::is_same_v<T, Assert> || std::is_same_v<T, Assume>) {
                    formula(*n.expr);
                } else if constexpr (std::is_same_v<T, If>) {
                    formula(*n.cond);
                    block(n.then_block);
                    if (n.else_block) block(*n.else_block);
                } else if constexpr (std::is_same_v<T, While>) {
                    formula(*n.guard);
                    for (auto& c : n.invariants) formula(*c.expr);
                    if (n.decreases) want(*n.decreases->expr, TT::Int);
                    ++loop_depth_;
                    block(n.body);
                    --loop_depth_;
                } else if constexpr (std::is_same_v<T, For>) {
                    want(*n.lo, TT::Int);
                    want(*n.hi, TT::Int);
                    push();
                    declare(n.var, Type::Int, s.span);
                    bool was = readonly_.count(n.var);
                    readonly_.insert(n.var);
                    for (auto& c : n.invariants) formula(*c.expr);
                    if (n.decreases) want(*n.decreases->expr, TT::Int);
                    ++loop_depth_;
                    block(n.body);
                    --loop_depth_;
                    if (!was) readonly_.erase(n.var);
                    pop();
                } else if constexpr (std::is_same_v<T, Break>) {
                    if (!loop_depth_) throw TypeError("break outside loop", s.span);
                }
            },
            s.node);
    }
};

bool closed_literal(const Expr& e) {
    if (std::holds_alternative<IntLit>(e.node) || std::holds_alternative<BoolLit>(e.node)) return true;
    if (auto* a = std::get_if<ArrayLit>(&e.node)) {
        for (auto& x : a->elems)
            if (!std::holds_alternative<IntLit>(x->node)) return false;
        return true;
    }
    return false;
}

}  // namespace

Program parse_program_untyped(const std::string& source, const std::string& source_name) {
    Parser p(source);
    return p.program(source_name);
}

void typecheck(const Program& p) {
    Checker c(&p);
    for (auto& m : p.methods) c.method(m);
}

Program parse_program(const std::string& source, const std::string& source_name) {
    auto p = parse_program_untyped(source, source_name);
    typecheck(p);
    return p;
}

ExprPtr parse_expr(const std::string& source) {
    Parser p(source);
    return p.lone_expr();
}

Test test_from_method(const Method& m) {
    if (!m.params.empty() || !m.returns.empty()) throw ShapeError("tests take no parameters");
    if (!m.requires_.empty() || !m.ensures.empty()) throw ShapeError("tests carry no specification");
    if (!m.body) throw ShapeError("test needs a body");
    Test t;
    t.name = m.name;
    t.trust = m.trust;
    t.span = m.span;
    int calls = 0;
    for (auto& s : *m.body) {
        const Rhs* r = nullptr;
        if (auto* d = std::get_if<VarDecl>(&s.node)) {
            if (d->init) r = &*d->init;
        } else if (auto* a = std::get_if<Assign>(&s.node)) {
            r = &a->value;
        }
        if (r && std::holds_alternative<Call>(*r)) ++calls;
    }
    if (calls != 1) throw ShapeError("exactly one call expected");
    bool after = false;
    for (auto& s : *m.body) {
        if (auto* d = std::get_if<VarDecl>(&s.node)) {
            if (!d->init || after) throw ShapeError("unexpected declaration in test " + m.name);
            if (auto* c = std::get_if<Call>(&*d->init)) {
                t.result = d->name;
                t.callee = c->callee;
                t.args = c->args;
                after = true;
                continue;
            }
            auto& v = std::get<ExprPtr>(*d->init);
            if (!closed_literal(*v)) throw ShapeError("test input " + d->name + " is not a closed literal");
            t.inputs.push_back({d->name, v});
        } else if (auto* a = std::get_if<Assert>(&s.node)) {
            if (!after) throw ShapeError("assertion before the call in test " + m.name);
            Clause c;
            c.id = s.id;
            c.expr = a->expr;
            c.span = s.span;
            c.trust = s.trust.trusted ? s.trust : m.trust;
            t.oracle.push_back(c);
        } else {
            throw ShapeError("unsupported statement in test " + m.name);
        }
    }
    std::set<std::string> names{t.result};
    for (auto& in : t.inputs) names.insert(in.name);
    for (auto& o : t.oracle)
        for (auto& v : free_vars(*o.expr))
            if (!names.count(v)) throw ShapeError("oracle mentions unknown name " + v);
    for (auto& a : t.args)
        for (auto& v : free_vars(*a))
            if (!names.count(v) || v == t.result) throw ShapeError("call argument mentions unknown name " + v);
    return t;
}

Test parse_test(const std::string& source) {
    auto p = parse_program_untyped(source, "test.mvl");
    if (p.methods.size() != 1) throw ShapeError("a test file holds exactly one test method");
    return test_from_method(p.methods[0]);
}

}  // namespace coevo
