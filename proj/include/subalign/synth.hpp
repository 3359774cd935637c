#pragma once

// Synthetic fixtures and brute-force reference implementations.
//
// The oracles here deliberately share nothing with the production aligners:
// no trellis, no summed-area table, no SIMD kernels.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "subalign/align.hpp"
#include "subalign/core.hpp"
#include "subalign/eval.hpp"
#include "subalign/matrix.hpp"

namespace subalign::synth {

// Deterministic generator: std::mt19937_64 (fully specified by the standard)
// seeded with the fixture seed, uniforms from the top 53 bits, normals by
// Box-Muller (cosine branch only). Unlike std::*_distribution this gives the
// same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next_u64();
    double uniform();                                // [0, 1)
    double uniform(double lo, double hi);            // [lo, hi)
    std::size_t uniform_index(std::size_t lo, std::size_t hi); // [lo, hi]
    double normal(double mean = 0.0, double sd = 1.0);

private:
    std::mt19937_64 engine_;
};

struct SyntheticAlignment {
    std::size_t token_count = 0;            // N
    std::size_t frame_count = 0;            // L
    std::vector<std::size_t> boundaries;    // B: <eob> rows
    std::vector<std::size_t> true_ends;     // exclusive end frame per block
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
    double frame_ms = 40.0;

    // Throws InfeasibleError when the fields are inconsistent.
    void validate() const;
};

// Random layout: words per block in [1, 4], block spans ≥ max(1, L / (2K)).
SyntheticAlignment random_alignment(std::size_t blocks, std::size_t frames, double noise_sd,
                                    std::uint64_t seed, double frame_ms = 40.0);

struct BlockDiagonalFixture {
    AttentionMatrix attention;
    TaggedTokens tokens;
};

// 1.0 on each block's word rows over its true frame span, 0 elsewhere (the
// <eob> rows carry no block attention), plus N(0, noise_sd) noise.
BlockDiagonalFixture gen_block_diag(const SyntheticAlignment& spec);

// Tokens "w0 w1 ... <eob> ..." for the given layout.
TaggedTokens synthetic_tokens(std::size_t token_count, const std::vector<std::size_t>& boundaries);

// Emission frame f_k for token k gets 0.9 on its label; every other frame gets
// 0.9 on blank; the remaining mass is spread uniformly over the other labels.
CtcPosterior gen_peaky_posterior(const TaggedTokens& tokens,
                                 const std::vector<std::size_t>& emission_frames,
                                 const VocabMap& vocab, std::size_t frame_count,
                                 std::size_t blank_index = 0,
                                 FrameTimeMap frame_map = {});

// Vocabulary giving each distinct token its own label (blank = 0).
VocabMap vocab_for(const TaggedTokens& tokens);

// Exhaustive DTW over every monotone path, with the same forced diagonal at
// <eob> rows and the same tie preference. N ≤ 6 and L ≤ 8.
BlockTimings oracle_dtw(const AttentionMatrix& a, const TaggedTokens& tokens,
                        const AttentionOptions& opts = {});

// SBAAM greedy with every rectangle summed element by element.
BlockTimings oracle_sbaam(const AttentionMatrix& a, const TaggedTokens& tokens,
                          const AttentionOptions& opts = {});

// Reference preprocessing, written independently of the signal module.
Matrix naive_normalize(const Matrix& m);
Matrix naive_median_filter(const Matrix& m, std::size_t width);
Matrix naive_clip(const Matrix& m, double eps);

// Provider whose audio embedding is the mean of per-frame vectors overlapping
// the requested slice, and whose text embedding is looked up by block text.
class MockFrameProvider : public EmbeddingProvider {
public:
    MockFrameProvider(std::vector<Embedding> frame_vectors, double frame_ms,
                      std::map<std::string, Embedding> text_vectors);

    Embedding text_embed(const std::string& text, const std::string& lang) override;
    Embedding audio_embed(const std::string& audio_ref, std::int64_t start_ms,
                          std::int64_t end_ms, const std::string& lang) override;

private:
    std::vector<Embedding> frames_;
    double frame_ms_;
    std::map<std::string, Embedding> texts_;
};

std::unique_ptr<MockFrameProvider> mock_frame_provider(std::vector<Embedding> frame_vectors,
                                                       double frame_ms,
                                                       std::map<std::string, Embedding> text_vectors);

// Writes attention.tsv, tokens.txt, reference.srt and spec.json into dir.
void write_fixture(const std::filesystem::path& dir, const SyntheticAlignment& spec);

std::string spec_to_json(const SyntheticAlignment& spec);

} // namespace subalign::synth
