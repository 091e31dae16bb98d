#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace coevo {

struct SourcePos {
    int line = 0;
    int col = 0;
    auto operator<=>(const SourcePos&) const = default;
};

struct Span {
    SourcePos begin;
    SourcePos end;
};

struct StmtId {
    int value = -1;
    auto operator<=>(const StmtId&) const = default;
    bool valid() const { return value >= 0; }
};

enum class Type { Int, Bool, IntArray };

std::string to_string(Type t);

enum class TrustOrigin { User, Patched };

struct TrustTag {
    bool trusted = false;
    TrustOrigin origin = TrustOrigin::User;
    bool operator==(const TrustTag&) const = default;
    bool patched() const { return trusted && origin == TrustOrigin::Patched; }
};

enum class UnOp { Not, Neg };
enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Implies, Iff };
enum class QuantKind { Forall, Exists };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit {
    std::int64_t value;
};
struct BoolLit {
    bool value;
};
struct NullLit {};
struct VarRef {
    std::string name;
};
struct ArrayLit {
    std::vector<ExprPtr> elems;
};
struct Unary {
    UnOp op;
    ExprPtr operand;
};
struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
// 0 <= i < n style comparison chains; ops.size() == operands.size() - 1
struct Chain {
    std::vector<ExprPtr> operands;
    std::vector<BinOp> ops;
};
struct Length {
    ExprPtr array;
};
struct Index {
    ExprPtr array;
    ExprPtr index;
};
struct Quantifier {
    QuantKind kind;
    std::string var;
    ExprPtr body;
};
// presence(L) marker produced by the wf transformation
struct Presence {
    std::string fingerprint;
    std::string label;
};

struct Expr {
    std::variant<IntLit, BoolLit, NullLit, VarRef, ArrayLit, Unary, Binary, Chain, Length, Index, Quantifier,
                 Presence>
        node;
    Span span;
};

struct Clause {
    StmtId id;
    ExprPtr expr;
    Span span;
    TrustTag trust;
};

struct Call {
    std::string callee;
    std::vector<ExprPtr> args;
};

using Rhs = std::variant<ExprPtr, Call>;

struct Stmt;
using Block = std::vector<Stmt>;

struct VarDecl {
    std::string name;
    std::optional<Type> type;
    std::optional<Rhs> init;
};
struct Assign {
    std::string target;
    Rhs value;
};
struct Assert {
    ExprPtr expr;
};
struct Assume {
    ExprPtr expr;
};
struct If {
    ExprPtr cond;
    Block then_block;
    std::optional<Block> else_block;
};
struct While {
    ExprPtr guard;
    std::vector<Clause> invariants;
    std::optional<Clause> decreases;
    Block body;
};
struct For {
    std::string var;
    ExprPtr lo;
    ExprPtr hi;
    std::vector<Clause> invariants;
    std::optional<Clause> decreases;
    Block body;
};
struct Break {};

struct Stmt {
    StmtId id;
    Span span;
    TrustTag trust;
    std::variant<VarDecl, Assign, Assert, Assume, If, While, For, Break> node;
};

struct Param {
    std::string name;
    Type type;
};

struct Method {
    StmtId id;
    std::string name;
    std::vector<Param> params;
    std::vector<Param> returns;
    std::vector<Clause> requires_;
    std::vector<Clause> ensures;
    std::optional<Block> body;
    Span span;
    int body_line = 0;
    TrustTag trust;
};

struct Program {
    std::string source_name;
    std::vector<Method> methods;

    const Method* find(const std::string& name) const;
};

struct TestBinding {
    std::string name;
    ExprPtr value;
};

struct Test {
    std::string name;
    std::vector<TestBinding> inputs;
    std::string result;
    std::string callee;
    std::vector<ExprPtr> args;
    std::vector<Clause> oracle;
    TrustTag trust;
    Span span;
};

// walks every statement (including nested ones) in textual order
template <class F>
void for_each_stmt(const Block& b, F&& f) {
    for (const auto& s : b) {
        f(s);
        if (auto* i = std::get_if<If>(&s.node)) {
            for_each_stmt(i->then_block, f);
            if (i->else_block) for_each_stmt(*i->else_block, f);
        } else if (auto* w = std::get_if<While>(&s.node)) {
            for_each_stmt(w->body, f);
        } else if (auto* l = std::get_if<For>(&s.node)) {
            for_each_stmt(l->body, f);
        }
    }
}

bool structurally_equal(const Program& a, const Program& b);
bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace coevo
