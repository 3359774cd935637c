// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "subalign/align.hpp"
#include "subalign/core.hpp"
#include "subalign/defaults.hpp"
#include "subalign/error.hpp"
#include "subalign/eval.hpp"
#include "subalign/synth.hpp"

using namespace subalign;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Random tagged tokens with `blocks` blocks of 1..max_words words each.
TaggedTokens random_tokens(synth::Rng& rng, std::size_t blocks, std::size_t max_words) {
    std::vector<std::string> toks;
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t w = rng.uniform_index(1, max_words); w > 0; --w) {
            toks.push_back("t" + std::to_string(toks.size()));
        }
        toks.emplace_back(kEobMarker);
    }
    return TaggedTokens(std::move(toks));
}

Matrix random_attention(synth::Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform() < 0.1 ? 0.0 : rng.uniform(-1.0, 2.0);
    return m;
}

// Random tokens with at most `max_tokens` tokens.
TaggedTokens random_tokens_capped(synth::Rng& rng, std::size_t max_tokens) {
    for (;;) {
        const auto blocks = rng.uniform_index(1, std::max<std::size_t>(1, max_tokens / 2));
        auto t = random_tokens(rng, blocks, 3);
        if (t.size() <= max_tokens) return t;
    }
}

Outcome dtw_oracle() {
    synth::Rng rng(1001);
    const auto t0 = Clock::now();
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const auto tokens = random_tokens_capped(rng, 6);
        const auto frames = rng.uniform_index(tokens.block_count() + 1, 8);
        const AttentionMatrix a(random_attention(rng, tokens.size(), frames));
        AttentionOptions opts;
        opts.preprocess = i % 2 == 0;
        if (dtw_align(a, tokens, opts) != synth::oracle_dtw(a, tokens, opts)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            std::to_string(mismatches) + "/200 mismatches, " + std::to_string(secs) + " s"};
}

Outcome sbaam_oracle() {
    synth::Rng rng(2002);
    const auto t0 = Clock::now();
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const auto tokens = random_tokens_capped(rng, 20);
        const auto frames = rng.uniform_index(tokens.block_count(), 40);
        const AttentionMatrix a(random_attention(rng, tokens.size(), frames));
        AttentionOptions opts;
        opts.preprocess = i % 3 != 0;
        opts.skip_eob_row = i % 4 == 1;
        if (sbaam_align(a, tokens, opts) != synth::oracle_sbaam(a, tokens, opts)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            std::to_string(mismatches) + "/200 mismatches, " + std::to_string(secs) + " s"};
}

Outcome synthetic_recovery() {
    std::size_t total = 0, dtw_hits = 0, sbaam_hits = 0;
    const auto near = [](std::size_t a, std::size_t b) { return (a > b ? a - b : b - a) <= 1; };
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto spec = synth::random_alignment(5, 100, 0.05, seed);
        const auto fx = synth::gen_block_diag(spec);
        const auto d = dtw_align(fx.attention, fx.tokens).ends();
        const auto s = sbaam_align(fx.attention, fx.tokens).ends();
        for (std::size_t b = 0; b < spec.true_ends.size(); ++b) {
            ++total;
            dtw_hits += near(d[b], spec.true_ends[b]);
            sbaam_hits += near(s[b], spec.true_ends[b]);
        }
    }
    const double dr = 100.0 * static_cast<double>(dtw_hits) / static_cast<double>(total);
    const double sr = 100.0 * static_cast<double>(sbaam_hits) / static_cast<double>(total);
    char buf[128];
    std::snprintf(buf, sizeof buf, "dtw %.2f%%, sbaam %.2f%% of %zu ends within 1 frame", dr, sr, total);
    return {dr >= 95.0 && sr >= 95.0, buf};
}

Outcome ctc_recovery() {
    synth::Rng rng(4004);
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
        const auto tokens = random_tokens(rng, rng.uniform_index(1, 6), 4);
        const auto vocab = synth::vocab_for(tokens);
        std::vector<std::size_t> frames;
        std::size_t t = rng.uniform_index(0, 3);
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            frames.push_back(t);
            t += rng.uniform_index(1, 4);
        }
        const auto p = synth::gen_peaky_posterior(tokens, frames, vocab, t + rng.uniform_index(0, 3));
        std::vector<std::size_t> labels;
        for (const auto& tok : tokens.tokens()) labels.push_back(vocab.at(tok));
        const bool frames_ok = ctc_emission_frames(p, labels) == frames;
        const auto timings = ctc_forced_align(p, tokens, vocab);
        bool ends_ok = true;
        for (std::size_t b = 0; b < tokens.block_count(); ++b) {
            ends_ok = ends_ok && timings.intervals()[b].end == frames[tokens.boundaries()[b]] + 1;
        }
        if (!frames_ok || !ends_ok) ++failures;
    }
    Matrix lp(3, 3, std::log(0.05));
    lp(0, 1) = lp(1, 2) = lp(2, 0) = std::log(0.9);
    const auto hand = ctc_forced_align(CtcPosterior(lp, 0), tokens_from_tagged_text("a <eob>"),
                                       VocabMap{{"a", 1}, {"<eob>", 2}});
    const bool hand_ok = hand.size() == 1 && hand.intervals()[0] == FrameInterval{0, 2};
    return {failures == 0 && hand_ok,
            std::to_string(failures) + "/100 peaky failures, 3-frame example " + (hand_ok ? "[0,2)" : "wrong")};
}

Outcome constants() {
    const AttentionOptions opts;
    std::vector<std::string> bad;
    if (opts.eps != 0.01 || defaults::kClipEps != 0.01) bad.emplace_back("eps");
    if (opts.median_width != 7 || defaults::kMedianWidth != 7) bad.emplace_back("median width");
    if (defaults::kCplLimit != 42 || ConformityReport{}.cpl_limit != 42) bad.emplace_back("cpl");
    if (defaults::kCpsLimit != 21.0 || ConformityReport{}.cps_limit != 21.0) bad.emplace_back("cps");
    if (defaults::kPerceptionThresholdMs != 120) bad.emplace_back("perception threshold");
    if (defaults::kShiftThresholdMs != 0) bad.emplace_back("default shift threshold");
    if (defaults::kFrameMs != 40.0 || FrameTimeMap{}.boundary_ms(1) != 40.0) bad.emplace_back("frame ms");
    std::string detail = "eps 0.01, width 7, CPL 42, CPS 21, 120 ms, 40 ms";
    if (!bad.empty()) {
        detail = "wrong:";
        for (const auto& b : bad) detail += " " + b;
    }
    return {bad.empty(), detail};
}

// Random vectors per block; audio returns the vector of the block whose start matches.
class KeyedProvider : public EmbeddingProvider {
public:
    std::map<std::string, Embedding> text;
    std::map<std::int64_t, Embedding> audio;
    Embedding text_embed(const std::string& t, const std::string&) override { return text.at(t); }
    Embedding audio_embed(const std::string&, std::int64_t s, std::int64_t, const std::string&) override {
        return audio.at(s);
    }
};

Outcome subsonar_behaviour() {
    const std::size_t blocks = 5, per = 8, dim = 5;
    std::vector<Embedding> frames;
    std::map<std::string, Embedding> texts;
    std::vector<TimedBlock> tb;
    for (std::size_t b = 0; b < blocks; ++b) {
        Embedding v(dim, 0.0);
        v[b] = 1.0;
        for (std::size_t f = 0; f < per; ++f) frames.push_back(v);
        texts["block " + std::to_string(b)] = v;
        tb.push_back({static_cast<int>(b + 1), Timestamp(static_cast<std::int64_t>(b * per * 40)),
                      Timestamp(static_cast<std::int64_t>((b + 1) * per * 40)), {"block " + std::to_string(b)}});
    }
    for (std::size_t f = 0; f < 6; ++f) frames.push_back(Embedding(dim, 0.0));
    auto mock = synth::mock_frame_provider(frames, 40.0, texts);
    const SubtitleDocument doc(tb);
    std::vector<double> scores{subsonar_score(doc, "a", "en", *mock)};
    bool monotone = std::abs(scores[0] - 1.0) < 1e-12;
    for (int k = 1; k <= 5; ++k) {
        scores.push_back(subsonar_score(doc.shifted(40 * k), "a", "en", *mock));
        monotone = monotone && scores[k] < scores[k - 1];
    }

    synth::Rng rng(6006);
    bool scale_ok = true, mean_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        KeyedProvider p, scaled;
        std::vector<TimedBlock> rb;
        const auto n = rng.uniform_index(1, 8);
        for (std::size_t b = 0; b < n; ++b) {
            const auto key = "text " + std::to_string(b);
            Embedding t(16), a(16);
            for (auto& x : t) x = rng.normal(0.0, 1.0);
            for (auto& x : a) x = rng.normal(0.0, 1.0);
            const double ct = rng.uniform(0.01, 100.0), ca = rng.uniform(0.01, 100.0);
            Embedding ts = t, as = a;
            for (auto& x : ts) x *= ct;
            for (auto& x : as) x *= ca;
            const auto start = static_cast<std::int64_t>(b * 1000);
            p.text[key] = t;
            p.audio[start] = a;
            scaled.text[key] = ts;
            scaled.audio[start] = as;
            rb.push_back({static_cast<int>(b + 1), Timestamp(start), Timestamp(start + 1000), {key}});
        }
        const SubtitleDocument d(rb);
        const double s = subsonar_score(d, "a", "en", p);
        scale_ok = scale_ok && std::abs(s - subsonar_score(d, "a", "en", scaled)) <= 1e-9;
        const auto per_block = subsonar_block_scores(d, "a", "en", p);
        double sum = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            sum += cosine_similarity(p.text.at("text " + std::to_string(b)), p.audio.at(static_cast<std::int64_t>(b * 1000)));
        }
        double block_sum = 0.0;
        for (double x : per_block) block_sum += x;
        mean_ok = mean_ok && std::abs(s - sum / static_cast<double>(n)) <= 1e-9 &&
                  std::abs(s - block_sum / static_cast<double>(n)) <= 1e-9;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "shift 0..5 frames: %.3f %.3f %.3f %.3f %.3f %.3f; scale %s, mean %s", scores[0],
                  scores[1], scores[2], scores[3], scores[4], scores[5], scale_ok ? "ok" : "broken",
                  mean_ok ? "ok" : "broken");
    return {monotone && scale_ok && mean_ok, buf};
}

Outcome metric_checks() {
    std::vector<std::string> bad;
    const auto blk = [](int i, std::int64_t s, std::int64_t e, std::string text) {
        return TimedBlock{i, Timestamp(s), Timestamp(e), {std::move(text)}};
    };
    const SubtitleDocument ref({blk(1, 1000, 2000, "a"), blk(2, 3000, 4000, "b")});
    const SubtitleDocument hyp({blk(1, 1000, 2000, "a"), blk(2, 2800, 3900, "b")});
    const auto s120 = shift_stats(hyp, ref, defaults::kPerceptionThresholdMs);
    if (!(s120.edited_start_pct == 50 && s120.edited_end_pct == 0 && s120.edited_avg_pct == 25 &&
          s120.mean_abs_shift_ms == 200.0 && s120.std_abs_shift_ms == 0.0)) {
        bad.emplace_back("shift@120");
    }
    const auto s0 = shift_stats(hyp, ref, 0);
    if (!(s0.edited_start_pct == 50 && s0.edited_end_pct == 50 && s0.edited_avg_pct == 50 &&
          s0.mean_abs_shift_ms == 150.0 && s0.std_abs_shift_ms == 50.0)) {
        bad.emplace_back("shift@0");
    }

    const bool balanced_a[] = {true, true, false, false}, balanced_b[] = {true, false, true, false};
    if (cohen_kappa(balanced_a, balanced_b) != 0.0) bad.emplace_back("kappa balanced");
    const bool same[] = {true, false, true, true, false};
    if (cohen_kappa(same, same) != 1.0) bad.emplace_back("kappa identical");

    const auto c42 = conformity(SubtitleDocument({blk(1, 0, 2000, std::string(42, 'x'))}));
    if (c42.cpl_conform_pct != 100 || c42.cps_conform_pct != 100) bad.emplace_back("conformity 42 chars / 21 cps");
    const auto c43 = conformity(SubtitleDocument({blk(1, 0, 2000, std::string(43, 'x'))}));
    if (c43.cpl_conform_pct != 0 || c43.cps_conform_pct != 0) bad.emplace_back("conformity 43 chars");
    const auto mixed = conformity(SubtitleDocument({blk(1, 0, 2000, std::string(42, 'x')),
                                                    blk(2, 2000, 4000, std::string(43, 'x'))}));
    if (mixed.cpl_conform_pct != 50 || mixed.cps_conform_pct != 50) bad.emplace_back("conformity 50%");

    std::string detail = "shift 0/120, kappa 0/1, conformity 42/43 chars and 21 CPS";
    if (!bad.empty()) {
        detail = "wrong:";
        for (const auto& b : bad) detail += " " + b;
    }
    return {bad.empty(), detail};
}

bool valid_partition(const BlockTimings& t, std::size_t blocks, std::size_t frames) {
    if (t.size() != blocks) return false;
    std::size_t expect = 0;
    for (const auto& iv : t.intervals()) {
        if (iv.begin != expect || iv.end <= iv.begin) return false;
        expect = iv.end;
    }
    return expect <= frames;
}

Outcome structural_invariants() {
    synth::Rng rng(8008);
    int failures = 0;
    std::string first;
    for (int i = 0; i < 1000; ++i) {
        try {
            const auto blocks = rng.uniform_index(1, 8);
            auto tokens = random_tokens(rng, blocks, 5);
            if (rng.uniform() < 0.3) {
                // Multi-line blocks.
                std::vector<std::string> toks;
                for (std::size_t k = 0; k < tokens.size(); ++k) {
                    toks.push_back(tokens.tokens()[k]);
                    if (!tokens.is_boundary(k) && k + 1 < tokens.size() && !tokens.is_boundary(k + 1) &&
                        rng.uniform() < 0.3) {
                        toks.emplace_back(kEolMarker);
                    }
                }
                tokens = TaggedTokens(std::move(toks));
            }
            const auto frames = rng.uniform_index(blocks + 1, 120);
            const double frame_ms = rng.uniform_index(0, 1) ? 40.0 : rng.uniform(5.0, 80.0);
            const AttentionMatrix a(random_attention(rng, tokens.size(), frames), FrameTimeMap::uniform(frame_ms));
            AttentionOptions opts;
            opts.preprocess = rng.uniform() < 0.8;

            const auto vocab = synth::vocab_for(tokens);
            std::size_t labels = 1;
            for (const auto& [tok, id] : vocab) labels = std::max(labels, id + 1);
            const auto ctc_frames = 2 * tokens.size() + rng.uniform_index(0, 40);
            Matrix lp(ctc_frames, labels);
            for (std::size_t t = 0; t < ctc_frames; ++t) {
                double z = 0.0;
                for (std::size_t v = 0; v < labels; ++v) z += (lp(t, v) = rng.uniform(0.01, 1.0));
                for (std::size_t v = 0; v < labels; ++v) lp(t, v) = std::log(lp(t, v) / z);
            }
            const CtcPosterior p(lp, 0, FrameTimeMap::uniform(frame_ms));

            const std::vector<std::pair<BlockTimings, std::size_t>> results{
                {dtw_align(a, tokens, opts), frames},
                {sbaam_align(a, tokens, opts), frames},
                {ctc_forced_align(p, tokens, vocab), ctc_frames}};
            for (const auto& [timings, n] : results) {
                if (!valid_partition(timings, tokens.block_count(), n)) throw Error("bad partition");
                for (const auto& extended : {timings, timings.extended_to_end()}) {
                    const auto doc = assemble_document(tokens, extended);
                    const auto text = write_srt(doc);
                    const auto back = parse_srt(text);
                    if (!(back == doc) || write_srt(back) != text) throw Error("SRT round trip differs");
                }
            }
        } catch (const std::exception& e) {
            if (failures++ == 0) first = "case " + std::to_string(i) + ": " + e.what();
        }
    }
    return {failures == 0, std::to_string(failures) + "/1000 failures" + (first.empty() ? "" : " (" + first + ")")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"dtw matches exhaustive oracle", dtw_oracle},
        {"sbaam matches direct-sum oracle", sbaam_oracle},
        {"synthetic block-end recovery", synthetic_recovery},
        {"ctc recovers emission frames", ctc_recovery},
        {"default constants", constants},
        {"subsonar timing sensitivity", subsonar_behaviour},
        {"metric hand checks", metric_checks},
        {"structural invariants under fuzzing", structural_invariants},
    };
    int failed = 0;
    int number = 0;
    for (const auto& [name, check] : criteria) {
        ++number;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %d. %s: %s\n", o.ok ? "PASS" : "FAIL", number, name, o.detail.c_str());
        failed += !o.ok;
    }
    std::printf("%d/%zu criteria passed\n", number - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
