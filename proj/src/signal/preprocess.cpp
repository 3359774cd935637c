#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "subalign/error.hpp"
#include "subalign/signal.hpp"
#include "subalign/simd.hpp"

namespace subalign {

AttentionMatrix normalize_over_tokens(const AttentionMatrix& a) {
    const auto& k = simd::kernels();
    const auto& in = a.values;
    const std::size_t rows = in.rows();
    const std::size_t cols = in.cols();
    const double n = static_cast<double>(rows);

    std::vector<double> mean(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) k.accumulate(mean.data(), in.row(r).data(), cols);
    for (auto& m : mean) m /= n;

    std::vector<double> sd(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) k.accumulate_sq_dev(sd.data(), in.row(r).data(), mean.data(), cols);
    for (auto& s : sd) s = std::sqrt(s / n);

    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        k.standardize(out.row(r).data(), in.row(r).data(), mean.data(), sd.data(), defaults::kStdFloor, cols);
    }
    return {std::move(out), a.frame_map};
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
    if (n <= 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    return static_cast<std::size_t>(i < static_cast<std::ptrdiff_t>(n) ? i : period - i);
}

AttentionMatrix median_filter_rows(const AttentionMatrix& a, std::size_t width) {
    if (width == 0 || width % 2 == 0) {
        throw ValidationError("median filter width must be odd and positive, got " + std::to_string(width));
    }
    const auto& in = a.values;
    const std::size_t cols = in.cols();
    const auto half = static_cast<std::ptrdiff_t>(width / 2);

    Matrix out(in.rows(), cols);
    std::vector<double> window(width);
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const auto row = in.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto center = static_cast<std::ptrdiff_t>(c);
            for (std::ptrdiff_t w = -half; w <= half; ++w) {
                window[static_cast<std::size_t>(w + half)] = row[reflect_index(center + w, cols)];
            }
            auto mid = window.begin() + half;
            std::nth_element(window.begin(), mid, window.end());
            dst[c] = *mid;
        }
    }
    return {std::move(out), a.frame_map};
}

AttentionMatrix clip_negatives(const AttentionMatrix& a, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw ValidationError("clip epsilon must be positive, got " + std::to_string(eps));
    }
    Matrix out(a.values.rows(), a.values.cols());
    simd::kernels().replace_negatives(out.data().data(), a.values.data().data(), -eps, out.data().size());
    return {std::move(out), a.frame_map};
}

SummedAreaTable::SummedAreaTable(const Matrix& m) : table_(m.rows() + 1, m.cols() + 1, 0.0) {
    const auto& k = simd::kernels();
    const std::size_t width = m.cols() + 1;
    std::vector<double> running(width, 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto src = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) running[c + 1] = running[c] + src[c];
        k.add(table_.row(r + 1).data(), table_.row(r).data(), running.data(), width);
    }
}

double SummedAreaTable::rect_sum(std::size_t r0, std::size_t r1, std::size_t c0,
                                 std::size_t c1) const noexcept {
    if (r1 <= r0 || c1 <= c0) return 0.0;
    return (table_(r1, c1) - table_(r0, c1)) - (table_(r1, c0) - table_(r0, c0));
}

} // namespace subalign
