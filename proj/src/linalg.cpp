#include "cahiers/linalg.hpp"

#include <utility>

namespace cahiers {

RREF RREF::compute(std::vector<std::vector<Rational>> input) {
    RREF out;
    if (input.empty()) return out;
    const size_t ncols = input[0].size();
    size_t next = 0;  // next row slot to fill in `input`
    std::vector<int> pivots;
    for (size_t col = 0; col < ncols && next < input.size(); ++col) {
        size_t sel = next;
        while (sel < input.size() && input[sel][col] == 0) ++sel;
        if (sel == input.size()) continue;
        std::swap(input[next], input[sel]);
        const Rational lead = input[next][col];
        for (size_t c = col; c < ncols; ++c) input[next][c] /= lead;
        for (size_t r = 0; r < input.size(); ++r) {
            if (r == next || input[r][col] == 0) continue;
            const Rational factor = input[r][col];
            for (size_t c = col; c < ncols; ++c) input[r][c] -= factor * input[next][c];
        }
        pivots.push_back(static_cast<int>(col));
        ++next;
    }
    input.resize(next);
    out.rows = std::move(input);
    out.pivot_cols = std::move(pivots);
    return out;
}

int rational_rank(std::vector<std::vector<Rational>> rows) {
    return RREF::compute(std::move(rows)).rank();
}

}  // namespace cahiers
