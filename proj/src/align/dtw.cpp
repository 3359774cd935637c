#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "subalign/align.hpp"
#include "subalign/error.hpp"
#include "subalign/signal.hpp"

namespace subalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_attention_shape(const AttentionMatrix& a, const TaggedTokens& tokens) {
    if (a.tokens() != tokens.size()) {
        throw ValidationError("attention has " + std::to_string(a.tokens()) + " rows but text has " +
                              std::to_string(tokens.size()) + " tokens");
    }
}

} // namespace

Matrix dtw_trellis(const Matrix& cost, const TaggedTokens& tokens) {
    const std::size_t rows = cost.rows();
    const std::size_t cols = cost.cols();
    Matrix d(rows, cols, kInf);
    for (std::size_t i = 0; i < rows; ++i) {
        const bool boundary = tokens.is_boundary(i);
        for (std::size_t j = 0; j < cols; ++j) {
            double best;
            if (boundary) {
                // Boundary rows are entered diagonally and left at once.
                best = (i > 0 && j > 0) ? d(i - 1, j - 1) : kInf;
            } else if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = kInf;
                if (i > 0) best = std::min(best, d(i - 1, j));
                if (j > 0) best = std::min(best, d(i, j - 1));
                if (i > 0 && j > 0) best = std::min(best, d(i - 1, j - 1));
            }
            d(i, j) = (i == 0 && j == 0) ? cost(0, 0) : cost(i, j) + best;
        }
    }
    return d;
}

BlockTimings dtw_align(const AttentionMatrix& a, const TaggedTokens& tokens, const AttentionOptions& opts) {
    check_attention_shape(a, tokens);
    const std::size_t rows = a.tokens();
    const std::size_t cols = a.frames();
    const std::size_t blocks = tokens.block_count();
    if (cols <= blocks) {
        throw InfeasibleError("attention DTW needs more frames than blocks: " + std::to_string(cols) +
                              " frames for " + std::to_string(blocks) + " blocks");
    }

    Matrix cost = opts.preprocess ? median_filter_rows(normalize_over_tokens(a), opts.median_width).values
                                  : a.values;
    double mass = 0.0;
    for (auto& v : cost.data()) {
        v = -v;
        mass += std::abs(v);
    }
    const double tol = defaults::kTieTolerance * std::max(1.0, mass);

    const Matrix d = dtw_trellis(cost, tokens);
    if (!std::isfinite(d(rows - 1, cols - 1))) {
        throw InfeasibleError("no monotone path satisfies the block boundary constraints");
    }

    std::vector<std::size_t> recorded;
    recorded.reserve(blocks);
    std::size_t n = rows - 1;
    std::size_t l = cols - 1;
    while (n != 0 || l != 0) {
        if (tokens.is_boundary(n)) {
            recorded.push_back(l);
            --n;
            --l;
            continue;
        }
        // Preference on ties: diagonal, token advance, frame advance.
        struct Move {
            std::size_t n, l;
        };
        Move moves[3];
        std::size_t count = 0;
        if (n > 0 && l > 0) moves[count++] = {n - 1, l - 1};
        if (n > 0) moves[count++] = {n - 1, l};
        if (l > 0) moves[count++] = {n, l - 1};
        double best = kInf;
        for (std::size_t m = 0; m < count; ++m) best = std::min(best, d(moves[m].n, moves[m].l));
        for (std::size_t m = 0; m < count; ++m) {
            if (d(moves[m].n, moves[m].l) <= best + tol) {
                n = moves[m].n;
                l = moves[m].l;
                break;
            }
        }
    }

    std::reverse(recorded.begin(), recorded.end());
    std::vector<std::size_t> ends;
    ends.reserve(recorded.size());
    for (auto frame : recorded) ends.push_back(std::min(frame + 1, cols));
    return BlockTimings::from_ends(ends, cols, a.frame_map);
}

} // namespace subalign
