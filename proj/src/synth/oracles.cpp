#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "subalign/error.hpp"
#include "subalign/synth.hpp"

namespace subalign::synth {

namespace {

struct Cell {
    std::size_t n, l;
};

class PathSearch {
public:
    PathSearch(const Matrix& cost, const TaggedTokens& tokens, double tol)
        : cost_(cost), tokens_(tokens), tol_(tol) {}

    std::vector<Cell> run() {
        path_.push_back({cost_.rows() - 1, cost_.cols() - 1});
        visit();
        return best_path_;
    }

private:
    void visit() {
        const Cell at = path_.back();
        if (at.n == 0 && at.l == 0) {
            finish();
            return;
        }
        // Predecessors in tie preference order.
        Cell next[3];
        std::size_t count = 0;
        if (tokens_.is_boundary(at.n)) {
            if (at.n > 0 && at.l > 0) next[count++] = {at.n - 1, at.l - 1};
        } else {
            if (at.n > 0 && at.l > 0) next[count++] = {at.n - 1, at.l - 1};
            if (at.n > 0) next[count++] = {at.n - 1, at.l};
            if (at.l > 0) next[count++] = {at.n, at.l - 1};
        }
        for (std::size_t i = 0; i < count; ++i) {
            path_.push_back(next[i]);
            visit();
            path_.pop_back();
        }
    }

    void finish() {
        // Forward left fold, matching how an accumulated-cost table adds up.
        double total = 0.0;
        bool first = true;
        for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
            const double c = cost_(it->n, it->l);
            total = first ? c : total + c;
            first = false;
        }
        if (best_path_.empty() || total < best_cost_ - tol_) {
            best_cost_ = total;
            best_path_ = path_;
        }
    }

    const Matrix& cost_;
    const TaggedTokens& tokens_;
    double tol_;
    std::vector<Cell> path_;
    std::vector<Cell> best_path_;
    double best_cost_ = 0.0;
};

void check_rows(const AttentionMatrix& a, const TaggedTokens& tokens) {
    if (a.tokens() != tokens.size()) throw ValidationError("attention rows do not match the token count");
}

} // namespace

Matrix naive_normalize(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    const double n = static_cast<double>(m.rows());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
        const double mean = sum / n;
        double sq = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const double d = m(r, c) - mean;
            sq += d * d;
        }
        const double sd = std::sqrt(sq / n);
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = sd < 1e-9 ? 0.0 : (m(r, c) - mean) / sd;
    }
    return out;
}

Matrix naive_median_filter(const Matrix& m, std::size_t width) {
    if (width == 0 || width % 2 == 0) throw ValidationError("median width must be odd");
    const std::size_t half = width / 2;
    const std::size_t len = m.cols();

    // Walks `steps` positions away from `start`, bouncing off both ends
    // without repeating the edge sample.
    const auto bounce = [len](std::size_t start, int dir, std::size_t steps) {
        std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(start);
        if (len == 1) return std::size_t{0};
        for (std::size_t s = 0; s < steps; ++s) {
            if (pos + dir < 0 || pos + dir >= static_cast<std::ptrdiff_t>(len)) dir = -dir;
            pos += dir;
        }
        return static_cast<std::size_t>(pos);
    };

    Matrix out(m.rows(), len);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<double> padded;
        for (std::size_t k = half; k >= 1; --k) padded.push_back(m(r, bounce(0, +1, k)));
        for (std::size_t c = 0; c < len; ++c) padded.push_back(m(r, c));
        for (std::size_t k = 1; k <= half; ++k) padded.push_back(m(r, bounce(len - 1, -1, k)));
        for (std::size_t c = 0; c < len; ++c) {
            std::vector<double> window(padded.begin() + static_cast<std::ptrdiff_t>(c),
                                       padded.begin() + static_cast<std::ptrdiff_t>(c + width));
            std::sort(window.begin(), window.end());
            out(r, c) = window[half];
        }
    }
    return out;
}

Matrix naive_clip(const Matrix& m, double eps) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (out(r, c) < 0.0) out(r, c) = -eps;
        }
    }
    return out;
}

BlockTimings oracle_dtw(const AttentionMatrix& a, const TaggedTokens& tokens, const AttentionOptions& opts) {
    check_rows(a, tokens);
    if (a.tokens() > 6 || a.frames() > 8) throw ValidationError("oracle_dtw is capped at 6 tokens x 8 frames");
    if (a.frames() <= tokens.block_count()) throw InfeasibleError("not enough frames for the blocks");

    Matrix cost = opts.preprocess ? naive_median_filter(naive_normalize(a.values), opts.median_width) : a.values;
    double mass = 0.0;
    for (std::size_t r = 0; r < cost.rows(); ++r) {
        for (std::size_t c = 0; c < cost.cols(); ++c) {
            cost(r, c) = -cost(r, c);
            mass += std::abs(cost(r, c));
        }
    }
    const auto path = PathSearch(cost, tokens, 1e-9 * std::max(1.0, mass)).run();
    if (path.empty()) throw InfeasibleError("no constrained path");

    std::vector<std::size_t> ends;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (tokens.is_boundary(it->n)) ends.push_back(it->l + 1);
    }
    return BlockTimings::from_ends(ends, a.frames(), a.frame_map);
}

BlockTimings oracle_sbaam(const AttentionMatrix& a, const TaggedTokens& tokens, const AttentionOptions& opts) {
    check_rows(a, tokens);
    const std::size_t rows = a.tokens();
    const std::size_t cols = a.frames();
    const auto& bounds = tokens.boundaries();
    if (cols < bounds.size()) throw InfeasibleError("not enough frames for the blocks");

    const Matrix m = opts.preprocess ? naive_clip(naive_normalize(a.values), opts.eps) : a.values;
    double mass = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) mass += std::abs(m(r, c));
    }
    const double tol = 1e-9 * std::max(1.0, mass);

    const auto area = [&](std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
        double s = 0.0;
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = c0; c < c1; ++c) s += m(r, c);
        }
        return s;
    };

    std::vector<std::size_t> ends;
    std::size_t n = 0, l = 0;
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        const std::size_t eob = bounds[b];
        std::vector<std::pair<std::size_t, double>> candidates;
        for (std::size_t j = l + 1; j + (bounds.size() - 1 - b) <= cols; ++j) {
            candidates.emplace_back(j, area(n, eob, l, j) + area(eob + 1, rows, j + 1, cols));
        }
        double best = candidates.front().second;
        for (const auto& [j, s] : candidates) best = std::max(best, s);
        std::size_t chosen = candidates.front().first;
        for (const auto& [j, s] : candidates) {
            if (s >= best - tol) {
                chosen = j;
                break;
            }
        }
        ends.push_back(chosen);
        l = chosen;
        n = opts.skip_eob_row ? eob + 1 : eob;
    }
    return BlockTimings::from_ends(ends, cols, a.frame_map);
}

MockFrameProvider::MockFrameProvider(std::vector<Embedding> frame_vectors, double frame_ms,
                                     std::map<std::string, Embedding> text_vectors)
    : frames_(std::move(frame_vectors)), frame_ms_(frame_ms), texts_(std::move(text_vectors)) {
    if (frames_.empty()) throw ValidationError("mock provider needs at least one frame vector");
    if (!(frame_ms_ > 0.0)) throw ValidationError("mock provider frame duration must be positive");
    const auto dim = frames_.front().size();
    if (dim == 0) throw ValidationError("mock provider vectors must be non-empty");
    for (const auto& v : frames_) {
        if (v.size() != dim) throw ValidationError("mock provider frame vectors differ in dimension");
    }
    for (const auto& [text, v] : texts_) {
        if (v.size() != dim) throw ValidationError("mock provider text vector for '" + text + "' has wrong dimension");
    }
}

Embedding MockFrameProvider::text_embed(const std::string& text, const std::string&) {
    const auto it = texts_.find(text);
    if (it == texts_.end()) throw ProviderError("unknown block text '" + text + "'");
    return it->second;
}

Embedding MockFrameProvider::audio_embed(const std::string& audio_ref, std::int64_t start_ms, std::int64_t end_ms,
                                         const std::string&) {
    Embedding mean(frames_.front().size(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        const double f0 = static_cast<double>(i) * frame_ms_;
        const double f1 = f0 + frame_ms_;
        if (f0 < static_cast<double>(end_ms) && f1 > static_cast<double>(start_ms)) {
            for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += frames_[i][d];
            ++count;
        }
    }
    if (count == 0) throw ProviderError("empty audio slice " + audio_key(audio_ref, start_ms, end_ms));
    for (auto& v : mean) v /= static_cast<double>(count);
    return mean;
}

std::unique_ptr<MockFrameProvider> mock_frame_provider(std::vector<Embedding> frame_vectors, double frame_ms,
                                                       std::map<std::string, Embedding> text_vectors) {
    return std::make_unique<MockFrameProvider>(std::move(frame_vectors), frame_ms, std::move(text_vectors));
}

} // namespace subalign::synth
