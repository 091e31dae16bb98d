#pragma once

#include <optional>

#include "coevo/ast.hpp"

namespace coevo {

// v ranges over [lo, hi)
struct QuantRange {
    ExprPtr lo;
    ExprPtr hi;
};

std::optional<QuantRange> quant_range(const Quantifier& q);

}  // namespace coevo
