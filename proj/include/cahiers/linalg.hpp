#pragma once

#include <vector>

#include "cahiers/rational.hpp"

namespace cahiers {

// Exact Gauss-Jordan over the rationals. Rows are dense; the column order is
// whatever the caller baked into them.
struct RREF {
    std::vector<std::vector<Rational>> rows;  // nonzero rows, leading 1s, pivots cleared
    std::vector<int> pivot_cols;              // one per row, strictly increasing

    int rank() const { return static_cast<int>(rows.size()); }
    static RREF compute(std::vector<std::vector<Rational>> input);
};

int rational_rank(std::vector<std::vector<Rational>> rows);

}  // namespace cahiers
