#pragma once

// Subtitle data model: timed blocks, SRT serialization, and tagged text
// (word tokens interleaved with <eol>/<eob> markers).

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace subalign {

class BlockTimings;

inline constexpr std::string_view kEolMarker = "<eol>";
inline constexpr std::string_view kEobMarker = "<eob>";

// Integer milliseconds, limited to what an SRT timing line can express.
struct Timestamp {
    static constexpr std::int64_t kMaxMs = 99LL * 3600'000 + 59 * 60'000 + 59'000 + 999;

    std::int64_t ms = 0;

    Timestamp() = default;
    explicit Timestamp(std::int64_t milliseconds);

    // "HH:MM:SS,mmm"
    std::string to_srt() const;
    static Timestamp from_srt(std::string_view text);

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct TimedBlock {
    int index = 0; // 1-based
    Timestamp start;
    Timestamp end;
    std::vector<std::string> lines;

    // Lines joined with a single space.
    std::string text() const;

    friend bool operator==(const TimedBlock&, const TimedBlock&) = default;
};

class SubtitleDocument {
public:
    SubtitleDocument() = default;
    // Throws ValidationError if the blocks break ordering/overlap/text invariants.
    explicit SubtitleDocument(std::vector<TimedBlock> blocks);

    const std::vector<TimedBlock>& blocks() const noexcept { return blocks_; }
    std::size_t size() const noexcept { return blocks_.size(); }
    bool empty() const noexcept { return blocks_.empty(); }

    // Copy with every timestamp moved by delta_ms (clamped at 0 and kMaxMs).
    // Blocks that collapse to zero length are rejected.
    SubtitleDocument shifted(std::int64_t delta_ms) const;

    friend bool operator==(const SubtitleDocument&, const SubtitleDocument&) = default;

private:
    std::vector<TimedBlock> blocks_;
};

SubtitleDocument parse_srt(std::string_view text);
std::string write_srt(const SubtitleDocument& doc);

enum class TokenKind { word, eol, eob };

class TaggedTokens {
public:
    TaggedTokens() = default;
    // Validates the marker structure; the final token must be <eob>.
    explicit TaggedTokens(std::vector<std::string> tokens);

    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    // Positions of the <eob> tokens, strictly increasing; one per block.
    const std::vector<std::size_t>& boundaries() const noexcept { return boundaries_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t block_count() const noexcept { return boundaries_.size(); }
    TokenKind kind(std::size_t i) const;
    bool is_boundary(std::size_t i) const { return kind(i) == TokenKind::eob; }

    // Lines of block b: word tokens split at <eol>, joined by single spaces.
    std::vector<std::string> block_lines(std::size_t b) const;

    // Whitespace-joined token sequence, markers included.
    std::string to_text() const;

    friend bool operator==(const TaggedTokens&, const TaggedTokens&) = default;

private:
    std::vector<std::string> tokens_;
    std::vector<std::size_t> boundaries_;
};

TokenKind classify_token(std::string_view token) noexcept;

// Parses whitespace-separated tagged text. A missing final <eob> is appended
// and a message is pushed onto `warnings` when it is non-null.
TaggedTokens tokens_from_tagged_text(std::string_view text,
                                     std::vector<std::string>* warnings = nullptr);

// Joins tagged text with per-block timings into a subtitle document.
SubtitleDocument assemble_document(const TaggedTokens& tokens, const BlockTimings& timings);

} // namespace subalign
