#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "subalign/error.hpp"
#include "subalign/eval.hpp"
#include "subalign/simd.hpp"

namespace subalign {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    const auto& k = simd::kernels();
    const double na = k.dot(a.data(), a.data(), a.size());
    const double nb = k.dot(b.data(), b.data(), b.size());
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double cos = k.dot(a.data(), b.data(), a.size()) / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(cos, -1.0, 1.0);
}

std::vector<double> subsonar_block_scores(const SubtitleDocument& doc, const std::string& audio_ref,
                                          const std::string& lang, EmbeddingProvider& provider) {
    if (doc.empty()) throw ValidationError("SubSONAR needs at least one block");
    std::vector<double> scores;
    scores.reserve(doc.size());
    for (const auto& block : doc.blocks()) {
        try {
            const auto text = provider.text_embed(block.text(), lang);
            const auto audio = provider.audio_embed(audio_ref, block.start.ms, block.end.ms, lang);
            scores.push_back(cosine_similarity(text, audio));
        } catch (const Error& e) {
            throw ProviderError("block " + std::to_string(block.index) + ": " + e.what());
        }
    }
    return scores;
}

double subsonar_score(const SubtitleDocument& doc, const std::string& audio_ref, const std::string& lang,
                      EmbeddingProvider& provider) {
    const auto scores = subsonar_block_scores(doc, audio_ref, lang, provider);
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

std::size_t count_chars(std::string_view utf8) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < utf8.size();) {
        const auto lead = static_cast<unsigned char>(utf8[i]);
        std::size_t len;
        if (lead < 0x80) len = 1;
        else if ((lead & 0xE0) == 0xC0 && lead >= 0xC2) len = 2;
        else if ((lead & 0xF0) == 0xE0) len = 3;
        else if ((lead & 0xF8) == 0xF0 && lead <= 0xF4) len = 4;
        else throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        if (i + len > utf8.size()) throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t j = 1; j < len; ++j) {
            if ((static_cast<unsigned char>(utf8[i + j]) & 0xC0) != 0x80) {
                throw ParseError("invalid UTF-8 continuation byte at offset " + std::to_string(i + j));
            }
        }
        i += len;
        ++count;
    }
    return count;
}

ConformityReport conformity(const SubtitleDocument& doc, int cpl_limit, double cps_limit) {
    if (doc.empty()) throw ValidationError("conformity needs at least one block");
    if (cpl_limit <= 0 || !(cps_limit > 0.0)) throw ValidationError("CPL and CPS limits must be positive");

    ConformityReport report;
    report.cpl_limit = cpl_limit;
    report.cps_limit = cps_limit;
    std::size_t cpl_ok = 0, cps_ok = 0;
    for (const auto& block : doc.blocks()) {
        BlockConformity bc;
        bc.index = block.index;
        for (const auto& line : block.lines) bc.max_line_chars = std::max(bc.max_line_chars, count_chars(line));
        bc.text_chars = count_chars(block.text());
        const auto duration_ms = block.end.ms - block.start.ms;
        if (duration_ms <= 0) throw ValidationError("block " + std::to_string(block.index) + " has zero duration");
        bc.cps = static_cast<double>(bc.text_chars) * 1000.0 / static_cast<double>(duration_ms);
        bc.cpl_ok = bc.max_line_chars <= static_cast<std::size_t>(cpl_limit);
        // chars / seconds <= limit, kept free of the division
        bc.cps_ok = static_cast<double>(bc.text_chars) * 1000.0 <= cps_limit * static_cast<double>(duration_ms);
        cpl_ok += bc.cpl_ok;
        cps_ok += bc.cps_ok;
        report.blocks.push_back(bc);
    }
    const double n = static_cast<double>(doc.size());
    report.cpl_conform_pct = 100.0 * static_cast<double>(cpl_ok) / n;
    report.cps_conform_pct = 100.0 * static_cast<double>(cps_ok) / n;
    return report;
}

ShiftReport shift_stats(const SubtitleDocument& hyp, const SubtitleDocument& ref, std::int64_t threshold_ms) {
    if (hyp.size() != ref.size()) {
        throw ValidationError("hypothesis has " + std::to_string(hyp.size()) + " blocks, reference has " +
                              std::to_string(ref.size()));
    }
    if (threshold_ms < 0) throw ValidationError("shift threshold must be non-negative");

    ShiftReport report;
    report.threshold_ms = threshold_ms;
    std::vector<double> edited;
    std::size_t edited_start = 0, edited_end = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        const auto& h = hyp.blocks()[i];
        const auto& r = ref.blocks()[i];
        BlockShift s;
        s.index = h.index;
        s.start_shift_ms = r.start.ms - h.start.ms;
        s.end_shift_ms = r.end.ms - h.end.ms;
        s.start_edited = std::llabs(s.start_shift_ms) > threshold_ms;
        s.end_edited = std::llabs(s.end_shift_ms) > threshold_ms;
        if (s.start_edited) {
            ++edited_start;
            edited.push_back(static_cast<double>(std::llabs(s.start_shift_ms)));
        }
        if (s.end_edited) {
            ++edited_end;
            edited.push_back(static_cast<double>(std::llabs(s.end_shift_ms)));
        }
        report.blocks.push_back(s);
    }

    const double n = static_cast<double>(hyp.size());
    if (n > 0) {
        report.edited_start_pct = 100.0 * static_cast<double>(edited_start) / n;
        report.edited_end_pct = 100.0 * static_cast<double>(edited_end) / n;
        report.edited_avg_pct = (report.edited_start_pct + report.edited_end_pct) / 2.0;
    }
    report.edited_count = edited.size();
    if (!edited.empty()) {
        double sum = 0.0;
        for (double v : edited) sum += v;
        const double mean = sum / static_cast<double>(edited.size());
        double sq = 0.0;
        for (double v : edited) sq += (v - mean) * (v - mean);
        report.mean_abs_shift_ms = mean;
        report.std_abs_shift_ms = std::sqrt(sq / static_cast<double>(edited.size()));
    }
    return report;
}

KappaResult cohen_kappa_detail(std::span<const bool> a, std::span<const bool> b) {
    if (a.size() != b.size()) {
        throw ValidationError("annotation lengths differ: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    if (a.empty()) throw ValidationError("Cohen's kappa needs at least one item");

    std::size_t agree = 0, a_true = 0, b_true = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        a_true += a[i];
        b_true += b[i];
    }
    const double n = static_cast<double>(a.size());
    KappaResult r;
    r.n = a.size();
    r.observed = static_cast<double>(agree) / n;
    const double pa = static_cast<double>(a_true) / n;
    const double pb = static_cast<double>(b_true) / n;
    r.expected = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (r.expected == 1.0) {
        if (r.observed == 1.0) {
            r.kappa = 1.0;
            return r;
        }
        throw ValidationError("Cohen's kappa undefined: chance agreement is 1");
    }
    r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
    return r;
}

double cohen_kappa(std::span<const bool> a, std::span<const bool> b) { return cohen_kappa_detail(a, b).kappa; }

} // namespace subalign
