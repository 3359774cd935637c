#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace subalign {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Maps encoder frame boundaries to milliseconds. Frame i covers
// [boundary_ms(i), boundary_ms(i + 1)).
class FrameTimeMap {
public:
    struct Uniform {
        double frame_ms;
        friend bool operator==(const Uniform&, const Uniform&) = default;
    };
    struct Explicit {
        std::vector<double> end_ms; // end time of each frame
        friend bool operator==(const Explicit&, const Explicit&) = default;
    };

    FrameTimeMap() : FrameTimeMap(uniform(40.0)) {}
    static FrameTimeMap uniform(double frame_ms);
    static FrameTimeMap explicit_ends(std::vector<double> end_ms);

    bool is_uniform() const noexcept { return std::holds_alternative<Uniform>(repr_); }
    const Uniform* as_uniform() const noexcept { return std::get_if<Uniform>(&repr_); }
    const Explicit* as_explicit() const noexcept { return std::get_if<Explicit>(&repr_); }

    // Time of frame boundary `b` (0 ≤ b ≤ frames) in ms, unrounded.
    double boundary_ms(std::size_t b) const;
    // Same, rounded half away from zero to integer ms.
    std::int64_t boundary_ms_rounded(std::size_t b) const;

    // Throws ValidationError when an explicit map does not cover `frames`.
    void check_frames(std::size_t frames) const;

    friend bool operator==(const FrameTimeMap&, const FrameTimeMap&) = default;

private:
    explicit FrameTimeMap(std::variant<Uniform, Explicit> repr) : repr_(std::move(repr)) {}
    std::variant<Uniform, Explicit> repr_;
};

// Token-by-frame attention (rows: generated tokens, columns: encoder frames).
struct AttentionMatrix {
    Matrix values;
    FrameTimeMap frame_map;

    AttentionMatrix() = default;
    AttentionMatrix(Matrix v, FrameTimeMap map = {});

    std::size_t tokens() const noexcept { return values.rows(); }
    std::size_t frames() const noexcept { return values.cols(); }
};

// Frame-by-label CTC log-probabilities.
struct CtcPosterior {
    static constexpr double kRowSumTolerance = 1e-3;

    Matrix logprobs;
    std::size_t blank_index = 0;
    FrameTimeMap frame_map;

    CtcPosterior() = default;
    CtcPosterior(Matrix lp, std::size_t blank, FrameTimeMap map = {});

    std::size_t frames() const noexcept { return logprobs.rows(); }
    std::size_t labels() const noexcept { return logprobs.cols(); }
};

// Half-open frame interval.
struct FrameInterval {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const noexcept { return end - begin; }
    friend bool operator==(const FrameInterval&, const FrameInterval&) = default;
};

struct MsInterval {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    friend bool operator==(const MsInterval&, const MsInterval&) = default;
};

// Per-block frame intervals: contiguous, non-empty, starting at frame 0 and
// never past the last frame.
class BlockTimings {
public:
    BlockTimings(std::vector<FrameInterval> intervals, std::size_t frame_count,
                 FrameTimeMap frame_map = {});

    // Builds intervals from exclusive block end frames.
    static BlockTimings from_ends(std::span<const std::size_t> ends, std::size_t frame_count,
                                  FrameTimeMap frame_map = {});

    const std::vector<FrameInterval>& intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_.size(); }
    std::size_t frame_count() const noexcept { return frame_count_; }
    const FrameTimeMap& frame_map() const noexcept { return frame_map_; }

    std::vector<std::size_t> ends() const;
    std::vector<MsInterval> ms_intervals() const;

    // Copy with the final block stretched to the last frame.
    BlockTimings extended_to_end() const;

    friend bool operator==(const BlockTimings&, const BlockTimings&) = default;

private:
    std::vector<FrameInterval> intervals_;
    std::size_t frame_count_ = 0;
    FrameTimeMap frame_map_;
};

} // namespace subalign
