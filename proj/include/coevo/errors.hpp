#pragma once

#include <stdexcept>
#include <string>

#include "coevo/ast.hpp"

namespace coevo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpannedError : Error {
    Span span;
    SpannedError(const std::string& what, Span s) : Error(what), span(s) {}
};

struct SyntaxError : SpannedError {
    using SpannedError::SpannedError;
};
struct TypeError : SpannedError {
    using SpannedError::SpannedError;
};
struct UnsupportedConstruct : SpannedError {
    using SpannedError::SpannedError;
};
struct ShapeError : Error {
    using Error::Error;
};
struct PathExplosion : Error {
    using Error::Error;
};

struct EvalError : Error {
    using Error::Error;
};
struct DivisionByZero : EvalError {
    Span span;
    explicit DivisionByZero(Span s) : EvalError("division by zero"), span(s) {}
};
struct UnboundVariable : EvalError {
    std::string name;
    explicit UnboundVariable(std::string n) : EvalError("unbound variable " + n), name(std::move(n)) {}
};

struct BackendUnavailable : Error {
    using Error::Error;
};
struct MalformedModel : Error {
    using Error::Error;
};

struct PluginFailure : Error {
    using Error::Error;
};
struct NoPatches : Error {
    NoPatches() : Error("synthesizer returned no usable patch") {}
};

enum class PatchErrorKind { AmbiguousOriginal, OriginalNotFound, ReparseFailure };

struct PatchError : Error {
    PatchErrorKind kind;
    PatchError(PatchErrorKind k, const std::string& what) : Error(what), kind(k) {}
};

struct InsufficientDistinctMutations : Error {
    using Error::Error;
};

}  // namespace coevo
