#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "subalign/error.hpp"
#include "subalign/signal.hpp"
#include "subalign/synth.hpp"

namespace subalign::synth {

namespace {

// Noise uses its own stream so layout and noise draws never interleave.
constexpr std::uint64_t kNoiseStreamOffset = 0x9E3779B97F4A7C15ULL;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

} // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::uniform_index(std::size_t lo, std::size_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return lo + std::min(hi - lo, static_cast<std::size_t>(uniform() * span));
}

double Rng::normal(double mean, double sd) {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SyntheticAlignment::validate() const {
    const auto bad = [](const std::string& what) { return InfeasibleError("infeasible synthetic spec: " + what); };
    if (boundaries.empty()) throw bad("no blocks");
    if (frame_count < boundaries.size()) {
        throw bad(std::to_string(boundaries.size()) + " blocks cannot fit in " + std::to_string(frame_count) + " frames");
    }
    if (boundaries.back() + 1 != token_count) throw bad("last boundary must be the last token");
    if (true_ends.size() != boundaries.size()) throw bad("one true end per block required");
    std::size_t prev_b = 0, prev_e = 0;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i] < prev_b + (i == 0 ? 1 : 2)) throw bad("every block needs a word token");
        if (true_ends[i] <= prev_e) throw bad("true ends must be strictly increasing from frame 1");
        prev_b = boundaries[i];
        prev_e = true_ends[i];
    }
    if (true_ends.back() > frame_count) throw bad("last true end beyond the frame count");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw bad("noise std must be non-negative");
    if (!(frame_ms > 0.0)) throw bad("frame duration must be positive");
}

SyntheticAlignment random_alignment(std::size_t blocks, std::size_t frames, double noise_sd, std::uint64_t seed,
                                    double frame_ms) {
    if (blocks == 0 || frames < blocks) {
        throw InfeasibleError("infeasible synthetic spec: " + std::to_string(blocks) + " blocks in " +
                              std::to_string(frames) + " frames");
    }
    Rng rng(seed);
    SyntheticAlignment spec;
    spec.frame_count = frames;
    spec.noise_sd = noise_sd;
    spec.seed = seed;
    spec.frame_ms = frame_ms;

    std::size_t n = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        n += rng.uniform_index(1, 4);
        spec.boundaries.push_back(n);
        ++n;
    }
    spec.token_count = n;

    const std::size_t min_span = std::max<std::size_t>(1, frames / (2 * blocks));
    const std::size_t spare = frames - min_span * blocks;
    std::vector<double> weights(blocks);
    double total = 0.0;
    for (auto& w : weights) total += (w = rng.uniform() + 1e-3);
    std::vector<std::size_t> spans(blocks, min_span);
    std::size_t given = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto extra = static_cast<std::size_t>(std::floor(static_cast<double>(spare) * weights[b] / total));
        spans[b] += extra;
        given += extra;
    }
    for (std::size_t b = 0; given < spare; b = (b + 1) % blocks, ++given) ++spans[b];

    std::size_t end = 0;
    for (auto s : spans) spec.true_ends.push_back(end += s);
    spec.validate();
    return spec;
}

TaggedTokens synthetic_tokens(std::size_t token_count, const std::vector<std::size_t>& boundaries) {
    std::vector<std::string> tokens;
    tokens.reserve(token_count);
    std::size_t next_boundary = 0;
    for (std::size_t i = 0; i < token_count; ++i) {
        if (next_boundary < boundaries.size() && boundaries[next_boundary] == i) {
            tokens.emplace_back(kEobMarker);
            ++next_boundary;
        } else {
            tokens.push_back("w" + std::to_string(i));
        }
    }
    return TaggedTokens(std::move(tokens));
}

BlockDiagonalFixture gen_block_diag(const SyntheticAlignment& spec) {
    spec.validate();
    Matrix m(spec.token_count, spec.frame_count, 0.0);
    std::size_t first_row = 0, first_frame = 0;
    for (std::size_t b = 0; b < spec.boundaries.size(); ++b) {
        for (std::size_t r = first_row; r < spec.boundaries[b]; ++r) {
            for (std::size_t c = first_frame; c < spec.true_ends[b]; ++c) m(r, c) = 1.0;
        }
        first_row = spec.boundaries[b] + 1;
        first_frame = spec.true_ends[b];
    }
    if (spec.noise_sd > 0.0) {
        Rng rng(spec.seed + kNoiseStreamOffset);
        for (auto& v : m.data()) v += rng.normal(0.0, spec.noise_sd);
    }
    return {AttentionMatrix(std::move(m), FrameTimeMap::uniform(spec.frame_ms)),
            synthetic_tokens(spec.token_count, spec.boundaries)};
}

VocabMap vocab_for(const TaggedTokens& tokens) {
    VocabMap vocab;
    for (const auto& t : tokens.tokens()) vocab.emplace(t, vocab.size() + 1);
    return vocab;
}

CtcPosterior gen_peaky_posterior(const TaggedTokens& tokens, const std::vector<std::size_t>& emission_frames,
                                 const VocabMap& vocab, std::size_t frame_count, std::size_t blank_index,
                                 FrameTimeMap frame_map) {
    if (emission_frames.size() != tokens.size()) {
        throw ValidationError("need one emission frame per token");
    }
    std::size_t labels = blank_index + 1;
    std::vector<std::size_t> ids;
    for (const auto& t : tokens.tokens()) {
        const auto it = vocab.find(t);
        if (it == vocab.end()) throw ValidationError("token '" + t + "' is not in the vocabulary");
        if (it->second == blank_index) throw ValidationError("token '" + t + "' maps to blank");
        ids.push_back(it->second);
        labels = std::max(labels, it->second + 1);
    }
    for (const auto& [tok, id] : vocab) labels = std::max(labels, id + 1);
    for (std::size_t i = 0; i < emission_frames.size(); ++i) {
        if (emission_frames[i] >= frame_count) throw ValidationError("emission frame beyond the posterior");
        if (i > 0 && emission_frames[i] <= emission_frames[i - 1]) {
            throw ValidationError("emission frames collide or are out of order at token " + std::to_string(i));
        }
        if (i > 0 && ids[i] == ids[i - 1] && emission_frames[i] == emission_frames[i - 1] + 1) {
            throw ValidationError("repeated label needs a blank frame between emissions at token " + std::to_string(i));
        }
    }

    const double peak = 0.9;
    const double rest = (1.0 - peak) / static_cast<double>(labels - 1);
    Matrix lp(frame_count, labels, std::log(rest));
    std::size_t next = 0;
    for (std::size_t t = 0; t < frame_count; ++t) {
        const bool emits = next < emission_frames.size() && emission_frames[next] == t;
        lp(t, emits ? ids[next] : blank_index) = std::log(peak);
        if (emits) ++next;
    }
    return CtcPosterior(std::move(lp), blank_index, std::move(frame_map));
}

std::string spec_to_json(const SyntheticAlignment& spec) {
    nlohmann::json j;
    j["token_count"] = spec.token_count;
    j["frame_count"] = spec.frame_count;
    j["boundaries"] = spec.boundaries;
    j["true_ends"] = spec.true_ends;
    j["noise_sd"] = spec.noise_sd;
    j["seed"] = spec.seed;
    j["frame_ms"] = spec.frame_ms;
    j["rng"] = {{"engine", "mt19937_64"},
                {"uniform", "top 53 bits / 2^53"},
                {"normal", "box-muller cosine branch"},
                {"noise_seed", spec.seed + kNoiseStreamOffset}};
    return j.dump(2) + "\n";
}

void write_fixture(const std::filesystem::path& dir, const SyntheticAlignment& spec) {
    const auto fixture = gen_block_diag(spec);
    std::filesystem::create_directories(dir);
    write_text(dir / "attention.tsv", format_matrix(fixture.attention));
    write_text(dir / "tokens.txt", fixture.tokens.to_text() + "\n");
    const auto truth = BlockTimings::from_ends(spec.true_ends, spec.frame_count, FrameTimeMap::uniform(spec.frame_ms));
    write_text(dir / "reference.srt", write_srt(assemble_document(fixture.tokens, truth)));
    write_text(dir / "spec.json", spec_to_json(spec));
}

} // namespace subalign::synth
