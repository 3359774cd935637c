#pragma once

// Preprocessing shared by the attention aligners, plus the matrix text format.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "subalign/defaults.hpp"
#include "subalign/matrix.hpp"

namespace subalign {

// Standardizes every frame column over the token axis (population std).
// Columns with std below defaults::kStdFloor become zero.
AttentionMatrix normalize_over_tokens(const AttentionMatrix& a);

// 1-D median filter along frames, row by row, reflect padding (edge not
// repeated). Throws ValidationError for an even or zero width.
AttentionMatrix median_filter_rows(const AttentionMatrix& a,
                                   std::size_t width = defaults::kMedianWidth);

// Replaces every strictly negative value by -eps. eps must be positive.
AttentionMatrix clip_negatives(const AttentionMatrix& a, double eps = defaults::kClipEps);

// Index into a reflect-padded sequence of length n (no edge repetition).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept;

// Summed-area table with a zero border: O(1) sums over half-open rectangles.
class SummedAreaTable {
public:
    explicit SummedAreaTable(const Matrix& m);

    std::size_t rows() const noexcept { return table_.rows() - 1; }
    std::size_t cols() const noexcept { return table_.cols() - 1; }

    // Sum of m[0..i][0..j], both inclusive.
    double inclusive(std::size_t i, std::size_t j) const noexcept {
        return table_(i + 1, j + 1);
    }

    // Sum over rows [r0, r1) and columns [c0, c1); empty ranges give 0.
    double rect_sum(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const noexcept;

    // Row `r` of the bordered table, length cols() + 1: entry c is the sum
    // of m[0..r)[0..c).
    const double* border_row(std::size_t r) const noexcept { return table_.row(r).data(); }

private:
    Matrix table_;
};

inline SummedAreaTable prefix_sums(const AttentionMatrix& a) { return SummedAreaTable(a.values); }

// Matrix text format:
//   line 1: "N L FRAME_MS" or "N L frame_times"   (attention)
//           "L V BLANK FRAME_MS" or "L V BLANK frame_times"   (posterior)
//   line 2 (frame_times only): L tab-separated frame end times in ms
//   then one line per row, values separated by single tabs.
using MatrixFile = std::variant<AttentionMatrix, CtcPosterior>;

MatrixFile parse_matrix(std::string_view text);
MatrixFile read_matrix(const std::filesystem::path& path);
AttentionMatrix read_attention(const std::filesystem::path& path);
CtcPosterior read_posterior(const std::filesystem::path& path);

std::string format_matrix(const AttentionMatrix& a);
std::string format_matrix(const CtcPosterior& p);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace subalign
