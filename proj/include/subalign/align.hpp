#pragma once

// Block timestamp estimators: attention DTW, SBAAM and CTC forced alignment.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subalign/core.hpp"
#include "subalign/defaults.hpp"
#include "subalign/matrix.hpp"

namespace subalign {

struct AttentionOptions {
    // When false the matrix is used as given (no normalization/filter/clip).
    bool preprocess = true;
    std::size_t median_width = defaults::kMedianWidth;
    double eps = defaults::kClipEps;
    // SBAAM only: start the next block's token span after the previous <eob>
    // row instead of on it.
    bool skip_eob_row = false;
};

// Attention DTW. Costs are the negated (normalized, median-filtered) attention.
// Rows holding <eob> admit only a diagonal step, so each block boundary takes
// exactly one frame; the frame of each <eob> cell closes its block.
// Requires rows == tokens.size() and frames > blocks.
BlockTimings dtw_align(const AttentionMatrix& a, const TaggedTokens& tokens,
                       const AttentionOptions& opts = {});

// Accumulated cost trellis used by dtw_align, exposed for inspection.
Matrix dtw_trellis(const Matrix& cost, const TaggedTokens& tokens);

// SBAAM: per block, greedily choose the split frame maximizing the attention
// area of the current block plus the area of the remaining text with the
// remaining audio. Requires rows == tokens.size() and frames ≥ blocks.
BlockTimings sbaam_align(const AttentionMatrix& a, const TaggedTokens& tokens,
                         const AttentionOptions& opts = {});

using VocabMap = std::unordered_map<std::string, std::size_t>;

// "label_id<TAB>token" per line.
VocabMap parse_vocab(std::string_view text);
VocabMap read_vocab(const std::filesystem::path& path);

// Viterbi forced alignment of the tagged tokens (markers included) over the
// blank-interleaved CTC topology. Each block ends one frame after the frame
// where its <eob> label is first emitted.
BlockTimings ctc_forced_align(const CtcPosterior& p, const TaggedTokens& tokens,
                              const VocabMap& vocab);

// Frame index at which each target label is first emitted on the Viterbi path.
std::vector<std::size_t> ctc_emission_frames(const CtcPosterior& p,
                                             std::span<const std::size_t> labels);

enum class Method { dtw, sbaam, ctcseg };

std::string_view to_string(Method m) noexcept;
// Throws ValidationError for unknown names.
Method method_from_string(std::string_view name);

struct AlignInputs {
    TaggedTokens tokens;
    std::optional<AttentionMatrix> attention;
    std::optional<CtcPosterior> posterior;
    std::optional<VocabMap> vocab;
};

struct AlignConfig {
    Method method = Method::sbaam;
    AttentionOptions attention;
    bool extend_last = false;
};

BlockTimings align_timings(const AlignInputs& in, const AlignConfig& cfg);
SubtitleDocument align(const AlignInputs& in, const AlignConfig& cfg);

} // namespace subalign
