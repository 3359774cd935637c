#include <algorithm>
#include <string>

#include "subalign/core.hpp"
#include "subalign/error.hpp"
#include "subalign/matrix.hpp"

namespace subalign {

std::string TimedBlock::text() const {
    std::string out;
    for (const auto& line : lines) {
        if (!out.empty()) out += ' ';
        out += line;
    }
    return out;
}

SubtitleDocument::SubtitleDocument(std::vector<TimedBlock> blocks) : blocks_(std::move(blocks)) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& b = blocks_[i];
        const auto where = "block " + std::to_string(b.index) + ": ";
        if (b.start >= b.end) throw ValidationError(where + "start must precede end");
        if (b.lines.empty()) throw ValidationError(where + "no text lines");
        for (const auto& line : b.lines) {
            if (line.empty() || line.find_first_of("\r\n") != std::string::npos ||
                line.find(kEolMarker) != std::string::npos ||
                line.find(kEobMarker) != std::string::npos) {
                throw ValidationError(where + "invalid text line '" + line + "'");
            }
        }
        if (i > 0) {
            const auto& prev = blocks_[i - 1];
            if (b.index <= prev.index) throw ValidationError(where + "index not strictly increasing");
            if (prev.end > b.start) throw ValidationError(where + "overlaps the previous block");
        }
    }
}

SubtitleDocument SubtitleDocument::shifted(std::int64_t delta_ms) const {
    auto moved = blocks_;
    for (auto& b : moved) {
        b.start = Timestamp(std::clamp<std::int64_t>(b.start.ms + delta_ms, 0, Timestamp::kMaxMs));
        b.end = Timestamp(std::clamp<std::int64_t>(b.end.ms + delta_ms, 0, Timestamp::kMaxMs));
    }
    return SubtitleDocument(std::move(moved));
}

SubtitleDocument assemble_document(const TaggedTokens& tokens, const BlockTimings& timings) {
    if (timings.size() != tokens.block_count()) {
        throw ValidationError("timings for " + std::to_string(timings.size()) + " blocks but text has " +
                              std::to_string(tokens.block_count()));
    }
    const auto ms = timings.ms_intervals();
    std::vector<TimedBlock> blocks;
    blocks.reserve(ms.size());
    for (std::size_t b = 0; b < ms.size(); ++b) {
        TimedBlock block;
        block.index = static_cast<int>(b) + 1;
        block.start = Timestamp(ms[b].start_ms);
        block.end = Timestamp(ms[b].end_ms);
        block.lines = tokens.block_lines(b);
        blocks.push_back(std::move(block));
    }
    return SubtitleDocument(std::move(blocks));
}

} // namespace subalign
