#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "coevo/ast.hpp"

namespace coevo {

using Value = std::variant<std::int64_t, bool, std::vector<std::int64_t>>;
using Env = std::map<std::string, Value>;
using VarTypes = std::map<std::string, Type>;

std::string to_string(const Value& v);
std::string to_string(const Env& env);

struct BoundedDomain {
    std::int64_t int_lo = -4;
    std::int64_t int_hi = 4;
    int max_array_len = 3;
};

enum class VerdictStatus { Valid, Invalid, Unknown };
enum class Backend { Bounded, Smt };

const char* to_string(VerdictStatus s);
const char* to_string(Backend b);

struct Verdict {
    VerdictStatus status = VerdictStatus::Unknown;
    std::optional<Env> witness;
    Backend backend = Backend::Bounded;
    std::chrono::nanoseconds elapsed{0};
    std::string note;
};

struct SolverConfig {
    Backend backend = Backend::Bounded;
    BoundedDomain domain;
    std::string smt_cmd = "z3 -in -smt2";
    int timeout_ms = 5000;
    std::uint64_t max_evaluations = 50'000'000;
};

// out-of-range reads yield 0; arrays are never null
bool evaluate(const Expr& f, const Env& env);
Value eval_value(const Expr& e, const Env& env);

// types of free variables, guessed from usage where no hint is given
VarTypes infer_types(const Expr& f, const VarTypes& hints = {});

Verdict check_validity(const ExprPtr& vc, const VarTypes& types, const SolverConfig& cfg);
Verdict check_bounded(const ExprPtr& vc, const VarTypes& types, const BoundedDomain& d,
                      std::uint64_t max_evaluations = 50'000'000);
Verdict check_smt(const ExprPtr& vc, const VarTypes& types, const std::string& cmd, int timeout_ms);

std::string to_smtlib(const ExprPtr& vc, const VarTypes& types);
Env parse_smt_model(const std::string& reply, const VarTypes& types);

class Solver {
public:
    explicit Solver(SolverConfig cfg = {}) : cfg_(std::move(cfg)) {}

    Verdict check(const ExprPtr& vc, const VarTypes& types = {});
    bool valid(const ExprPtr& f, const VarTypes& types = {});
    // definitely unsatisfiable within the domain
    bool unsat(const ExprPtr& f, const VarTypes& types = {});

    const SolverConfig& config() const { return cfg_; }
    std::uint64_t queries() const { return queries_; }

private:
    SolverConfig cfg_;
    std::mutex mu_;
    std::unordered_map<std::string, Verdict> cache_;
    std::uint64_t queries_ = 0;
};

}  // namespace coevo
