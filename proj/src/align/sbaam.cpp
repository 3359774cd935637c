#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "subalign/align.hpp"
#include "subalign/error.hpp"
#include "subalign/signal.hpp"
#include "subalign/simd.hpp"

namespace subalign {

BlockTimings sbaam_align(const AttentionMatrix& a, const TaggedTokens& tokens, const AttentionOptions& opts) {
    if (a.tokens() != tokens.size()) {
        throw ValidationError("attention has " + std::to_string(a.tokens()) + " rows but text has " +
                              std::to_string(tokens.size()) + " tokens");
    }
    const std::size_t rows = a.tokens();
    const std::size_t cols = a.frames();
    const auto& bounds = tokens.boundaries();
    const std::size_t blocks = bounds.size();
    if (cols < blocks) {
        throw InfeasibleError("SBAAM needs at least one frame per block: " + std::to_string(cols) +
                              " frames for " + std::to_string(blocks) + " blocks");
    }

    const Matrix values = opts.preprocess ? clip_negatives(normalize_over_tokens(a), opts.eps).values : a.values;
    double mass = 0.0;
    for (double v : values.data()) mass += std::abs(v);
    const double tol = defaults::kTieTolerance * std::max(1.0, mass);

    const SummedAreaTable table(values);
    const auto& kernels = simd::kernels();
    std::vector<double> scores(cols + 1);
    std::vector<std::size_t> ends;
    ends.reserve(blocks);

    std::size_t n = 0;
    std::size_t l = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t eob = bounds[b];
        const std::size_t lo = l + 1;
        const std::size_t hi = cols - (blocks - 1 - b); // inclusive; later blocks keep a frame each

        // score(j) = sum A[n:eob, l:j] + sum A[eob+1:N, j+1:L]; frame j is in neither area.
        const double* top_hi = table.border_row(eob);
        const double* top_lo = table.border_row(n);
        const double* rest_hi = table.border_row(rows);
        const double* rest_lo = table.border_row(eob + 1);
        const double base0 = top_hi[l] - top_lo[l];
        const double base1 = rest_hi[cols] - rest_lo[cols];
        const std::size_t vec_hi = std::min(hi, cols - 1);
        if (vec_hi >= lo) {
            kernels.split_scores(scores.data() + lo, top_hi + lo, top_lo + lo, base0, rest_hi + lo + 1,
                                 rest_lo + lo + 1, base1, vec_hi - lo + 1);
        }
        if (hi == cols) scores[cols] = table.rect_sum(n, eob, l, cols);

        const double best = *std::max_element(scores.begin() + lo, scores.begin() + hi + 1);
        std::size_t chosen = lo;
        while (scores[chosen] < best - tol) ++chosen;

        ends.push_back(chosen);
        l = chosen;
        n = opts.skip_eob_row ? eob + 1 : eob;
    }
    return BlockTimings::from_ends(ends, cols, a.frame_map);
}

} // namespace subalign
