#pragma once

// Timing and quality metrics for subtitle documents.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subalign/core.hpp"
#include "subalign/defaults.hpp"

namespace subalign {

using Embedding = std::vector<double>;

// Source of text and audio embeddings living in one shared space.
// Implementations throw ProviderError on failure and must tolerate
// concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual Embedding text_embed(const std::string& text, const std::string& lang) = 0;
    virtual Embedding audio_embed(const std::string& audio_ref, std::int64_t start_ms,
                                  std::int64_t end_ms, const std::string& lang) = 0;
};

// Cosine similarity; 0 when either vector has zero norm. Sizes must match.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Per-block cosine similarities between text and audio-slice embeddings.
std::vector<double> subsonar_block_scores(const SubtitleDocument& doc,
                                          const std::string& audio_ref,
                                          const std::string& lang, EmbeddingProvider& provider);

// Mean of subsonar_block_scores, in [-1, 1].
double subsonar_score(const SubtitleDocument& doc, const std::string& audio_ref,
                      const std::string& lang, EmbeddingProvider& provider);

// Unicode scalar values in a UTF-8 string. Throws ParseError on invalid UTF-8.
std::size_t count_chars(std::string_view utf8);

struct BlockConformity {
    int index = 0;
    std::size_t max_line_chars = 0;
    std::size_t text_chars = 0;
    double cps = 0.0;
    bool cpl_ok = false;
    bool cps_ok = false;
};

struct ConformityReport {
    int cpl_limit = defaults::kCplLimit;
    double cps_limit = defaults::kCpsLimit;
    double cpl_conform_pct = 0.0;
    double cps_conform_pct = 0.0;
    std::vector<BlockConformity> blocks;
};

ConformityReport conformity(const SubtitleDocument& doc, int cpl_limit = defaults::kCplLimit,
                            double cps_limit = defaults::kCpsLimit);

struct BlockShift {
    int index = 0;
    std::int64_t start_shift_ms = 0; // ref - hyp
    std::int64_t end_shift_ms = 0;
    bool start_edited = false;
    bool end_edited = false;
};

struct ShiftReport {
    std::int64_t threshold_ms = 0;
    std::vector<BlockShift> blocks;
    double edited_start_pct = 0.0;
    double edited_end_pct = 0.0;
    double edited_avg_pct = 0.0;
    std::size_t edited_count = 0;
    // Mean and population std of |shift| over edited timestamps; empty when
    // nothing was edited.
    std::optional<double> mean_abs_shift_ms;
    std::optional<double> std_abs_shift_ms;
};

ShiftReport shift_stats(const SubtitleDocument& hyp, const SubtitleDocument& ref,
                        std::int64_t threshold_ms = defaults::kShiftThresholdMs);

struct KappaResult {
    double kappa = 0.0;
    double observed = 0.0; // p_o
    double expected = 0.0; // p_e
    std::size_t n = 0;
};

KappaResult cohen_kappa_detail(std::span<const bool> a, std::span<const bool> b);
double cohen_kappa(std::span<const bool> a, std::span<const bool> b);

// Embeddings from a JSON-lines file:
//   {"kind":"text"|"audio","key":...,"vector":[...]}
// Text keys are exact block texts; audio keys are "audio_ref:start_ms:end_ms".
std::unique_ptr<EmbeddingProvider> file_provider(const std::string& path);
std::unique_ptr<EmbeddingProvider> file_provider_from_string(std::string_view jsonl);

// Client for an HTTP embedding service: POST <base_url>/embed.
std::unique_ptr<EmbeddingProvider> remote_provider(const std::string& base_url,
                                                   double timeout_s = 30.0);

inline std::string audio_key(std::string_view audio_ref, std::int64_t start_ms,
                             std::int64_t end_ms) {
    return std::string(audio_ref) + ":" + std::to_string(start_ms) + ":" + std::to_string(end_ms);
}

} // namespace subalign
