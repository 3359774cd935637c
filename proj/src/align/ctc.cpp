#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "subalign/align.hpp"
#include "subalign/error.hpp"

namespace subalign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace

VocabMap parse_vocab(std::string_view text) {
    VocabMap vocab;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        const auto tab = line.find('\t');
        const auto where = "vocab line " + std::to_string(line_no) + ": ";
        if (tab == std::string_view::npos) throw ParseError(where + "expected 'label_id<TAB>token'");
        std::size_t id = 0;
        const auto id_text = line.substr(0, tab);
        const auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
        if (ec != std::errc{} || p != id_text.data() + id_text.size()) {
            throw ParseError(where + "malformed label id '" + std::string(id_text) + "'");
        }
        const auto token = std::string(line.substr(tab + 1));
        if (token.empty()) throw ParseError(where + "empty token");
        if (!vocab.emplace(token, id).second) throw ParseError(where + "duplicate token '" + token + "'");
    }
    return vocab;
}

VocabMap read_vocab(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_vocab(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<std::size_t> ctc_emission_frames(const CtcPosterior& p, std::span<const std::size_t> labels) {
    const std::size_t frames = p.frames();
    const std::size_t blank = p.blank_index;
    const std::size_t k = labels.size();
    if (k == 0) throw ValidationError("empty label sequence");
    for (auto lab : labels) {
        if (lab == blank || lab >= p.labels()) {
            throw ValidationError("label " + std::to_string(lab) + " is blank or outside the vocabulary");
        }
    }
    std::size_t repeats = 0;
    for (std::size_t i = 1; i < k; ++i) repeats += labels[i] == labels[i - 1];
    if (frames < k + repeats) {
        throw InfeasibleError("CTC alignment infeasible: " + std::to_string(k) + " labels (" +
                              std::to_string(repeats) + " repeats) need at least " +
                              std::to_string(k + repeats) + " frames, posterior has " + std::to_string(frames));
    }

    // Expanded topology: even states are blank, state 2i+1 is labels[i].
    const std::size_t states = 2 * k + 1;
    const auto label_of = [&](std::size_t s) { return s % 2 == 0 ? blank : labels[s / 2]; };

    std::vector<double> prev(states, kNegInf), cur(states, kNegInf);
    std::vector<std::uint8_t> back(frames * states, 0);
    prev[0] = p.logprobs(0, blank);
    prev[1] = p.logprobs(0, labels[0]);

    for (std::size_t t = 1; t < frames; ++t) {
        const auto row = p.logprobs.row(t);
        for (std::size_t s = 0; s < states; ++s) {
            // Preference on ties: stay, advance by one, skip a blank.
            double best = prev[s];
            std::uint8_t step = 0;
            if (s >= 1 && prev[s - 1] > best) {
                best = prev[s - 1];
                step = 1;
            }
            if (s >= 2 && s % 2 == 1 && label_of(s) != label_of(s - 2) && prev[s - 2] > best) {
                best = prev[s - 2];
                step = 2;
            }
            cur[s] = best == kNegInf ? kNegInf : best + row[label_of(s)];
            back[t * states + s] = step;
        }
        std::swap(prev, cur);
    }

    std::size_t state = states - 1;
    if (prev[states - 2] > prev[states - 1]) state = states - 2;
    if (prev[state] == kNegInf) throw InfeasibleError("CTC alignment infeasible: no path has non-zero probability");

    std::vector<std::size_t> emitted(k, 0);
    for (std::size_t t = frames; t-- > 0;) {
        if (state % 2 == 1) emitted[state / 2] = t; // overwritten down to the first frame
        if (t > 0) state -= back[t * states + state];
    }
    if (state > 1) throw InfeasibleError("CTC backtrace did not reach an initial state");
    return emitted;
}

BlockTimings ctc_forced_align(const CtcPosterior& p, const TaggedTokens& tokens, const VocabMap& vocab) {
    std::vector<std::size_t> labels;
    labels.reserve(tokens.size());
    for (const auto& tok : tokens.tokens()) {
        const auto it = vocab.find(tok);
        if (it == vocab.end()) throw ValidationError("token '" + tok + "' is not in the vocabulary");
        if (it->second == p.blank_index) throw ValidationError("token '" + tok + "' maps to the blank label");
        labels.push_back(it->second);
    }

    const auto emitted = ctc_emission_frames(p, labels);
    std::vector<std::size_t> ends;
    ends.reserve(tokens.block_count());
    for (auto b : tokens.boundaries()) ends.push_back(std::min(emitted[b] + 1, p.frames()));
    return BlockTimings::from_ends(ends, p.frames(), p.frame_map);
}

} // namespace subalign
