#include <cmath>
#include <string>

#include "subalign/error.hpp"
#include "subalign/matrix.hpp"

namespace subalign {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("matrix data size " + std::to_string(data_.size()) + " != " +
                              std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ValidationError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

FrameTimeMap FrameTimeMap::uniform(double frame_ms) {
    if (!(frame_ms > 0.0) || !std::isfinite(frame_ms)) {
        throw ValidationError("frame duration must be positive, got " + std::to_string(frame_ms));
    }
    return FrameTimeMap(Uniform{frame_ms});
}

FrameTimeMap FrameTimeMap::explicit_ends(std::vector<double> end_ms) {
    if (end_ms.empty()) throw ValidationError("explicit frame map has no frames");
    double prev = 0.0;
    for (std::size_t i = 0; i < end_ms.size(); ++i) {
        if (!std::isfinite(end_ms[i]) || end_ms[i] <= prev) {
            throw ValidationError("frame end times must be positive and strictly increasing (frame " +
                                  std::to_string(i) + ")");
        }
        prev = end_ms[i];
    }
    return FrameTimeMap(Explicit{std::move(end_ms)});
}

double FrameTimeMap::boundary_ms(std::size_t b) const {
    if (const auto* u = as_uniform()) return static_cast<double>(b) * u->frame_ms;
    const auto& ends = std::get<Explicit>(repr_).end_ms;
    if (b == 0) return 0.0;
    if (b > ends.size()) throw ValidationError("frame boundary " + std::to_string(b) + " beyond map");
    return ends[b - 1];
}

std::int64_t FrameTimeMap::boundary_ms_rounded(std::size_t b) const {
    return static_cast<std::int64_t>(std::llround(boundary_ms(b)));
}

void FrameTimeMap::check_frames(std::size_t frames) const {
    if (const auto* e = as_explicit(); e && e->end_ms.size() != frames) {
        throw ValidationError("frame map lists " + std::to_string(e->end_ms.size()) +
                              " frames but matrix has " + std::to_string(frames));
    }
}

AttentionMatrix::AttentionMatrix(Matrix v, FrameTimeMap map)
    : values(std::move(v)), frame_map(std::move(map)) {
    if (values.rows() == 0 || values.cols() == 0) throw ValidationError("attention matrix is empty");
    if (!values.all_finite()) throw ValidationError("attention matrix has non-finite values");
    frame_map.check_frames(values.cols());
}

CtcPosterior::CtcPosterior(Matrix lp, std::size_t blank, FrameTimeMap map)
    : logprobs(std::move(lp)), blank_index(blank), frame_map(std::move(map)) {
    if (logprobs.rows() == 0 || logprobs.cols() == 0) throw ValidationError("posterior is empty");
    if (blank_index >= logprobs.cols()) {
        throw ValidationError("blank index " + std::to_string(blank_index) + " outside vocabulary of " +
                              std::to_string(logprobs.cols()));
    }
    for (std::size_t t = 0; t < logprobs.rows(); ++t) {
        double sum = 0.0;
        for (double v : logprobs.row(t)) {
            if (std::isnan(v) || v == INFINITY) {
                throw ValidationError("posterior frame " + std::to_string(t) + " has invalid log-probability");
            }
            sum += std::exp(v);
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw ValidationError("posterior frame " + std::to_string(t) + " sums to " +
                                  std::to_string(sum) + " after exponentiation");
        }
    }
    frame_map.check_frames(logprobs.rows());
}

BlockTimings::BlockTimings(std::vector<FrameInterval> intervals, std::size_t frame_count,
                           FrameTimeMap frame_map)
    : intervals_(std::move(intervals)), frame_count_(frame_count), frame_map_(std::move(frame_map)) {
    frame_map_.check_frames(frame_count_);
    std::size_t expected_begin = 0;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (iv.begin != expected_begin || iv.end <= iv.begin || iv.end > frame_count_) {
            throw ValidationError("block " + std::to_string(i) + " interval [" + std::to_string(iv.begin) +
                                  ", " + std::to_string(iv.end) + ") breaks contiguity within " +
                                  std::to_string(frame_count_) + " frames");
        }
        expected_begin = iv.end;
    }
}

BlockTimings BlockTimings::from_ends(std::span<const std::size_t> ends, std::size_t frame_count,
                                     FrameTimeMap frame_map) {
    std::vector<FrameInterval> intervals;
    intervals.reserve(ends.size());
    std::size_t begin = 0;
    for (auto e : ends) {
        intervals.push_back({begin, e});
        begin = e;
    }
    return BlockTimings(std::move(intervals), frame_count, std::move(frame_map));
}

std::vector<std::size_t> BlockTimings::ends() const {
    std::vector<std::size_t> out;
    out.reserve(intervals_.size());
    for (const auto& iv : intervals_) out.push_back(iv.end);
    return out;
}

std::vector<MsInterval> BlockTimings::ms_intervals() const {
    std::vector<MsInterval> out;
    out.reserve(intervals_.size());
    for (const auto& iv : intervals_) {
        out.push_back({frame_map_.boundary_ms_rounded(iv.begin), frame_map_.boundary_ms_rounded(iv.end)});
    }
    return out;
}

BlockTimings BlockTimings::extended_to_end() const {
    auto copy = *this;
    if (!copy.intervals_.empty()) copy.intervals_.back().end = frame_count_;
    return copy;
}

} // namespace subalign
