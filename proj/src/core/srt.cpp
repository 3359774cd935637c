#include <charconv>
#include <cstdio>
#include <string>

#include "subalign/core.hpp"
#include "subalign/error.hpp"

namespace subalign {

namespace {

bool parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t count, std::int64_t& out) {
    if (pos + count > s.size()) return false;
    std::int64_t v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

bool contains_marker(std::string_view line) {
    return line.find(kEolMarker) != std::string_view::npos ||
           line.find(kEobMarker) != std::string_view::npos;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

} // namespace

Timestamp::Timestamp(std::int64_t milliseconds) : ms(milliseconds) {
    if (milliseconds < 0 || milliseconds > kMaxMs) {
        throw ValidationError("timestamp out of SRT range: " + std::to_string(milliseconds) + " ms");
    }
}

std::string Timestamp::to_srt() const {
    char buf[64];
    const auto h = ms / 3600'000;
    const auto m = (ms / 60'000) % 60;
    const auto s = (ms / 1000) % 60;
    const auto milli = ms % 1000;
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld,%03lld", static_cast<long long>(h),
                  static_cast<long long>(m), static_cast<long long>(s),
                  static_cast<long long>(milli));
    return buf;
}

Timestamp Timestamp::from_srt(std::string_view text) {
    std::int64_t h = 0, m = 0, s = 0, milli = 0;
    if (text.size() != 12 || text[2] != ':' || text[5] != ':' || text[8] != ',' ||
        !parse_fixed_digits(text, 0, 2, h) || !parse_fixed_digits(text, 3, 2, m) ||
        !parse_fixed_digits(text, 6, 2, s) || !parse_fixed_digits(text, 9, 3, milli) || m > 59 ||
        s > 59) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
    return Timestamp(((h * 60 + m) * 60 + s) * 1000 + milli);
}

SubtitleDocument parse_srt(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        lines.push_back(strip_cr(text.substr(pos, end - pos)));
        pos = end + 1;
    }

    std::vector<TimedBlock> blocks;
    std::size_t i = 0;
    const auto fail = [&](std::size_t line_no, int block_no, const std::string& what) -> ParseError {
        return ParseError("SRT block " + std::to_string(block_no) + " (line " +
                          std::to_string(line_no + 1) + "): " + what);
    };

    while (i < lines.size()) {
        if (is_blank(lines[i])) {
            ++i;
            continue;
        }
        const int ordinal = static_cast<int>(blocks.size()) + 1;

        TimedBlock block;
        const auto idx_line = lines[i];
        auto [p, ec] = std::from_chars(idx_line.data(), idx_line.data() + idx_line.size(), block.index);
        if (ec != std::errc{} || p != idx_line.data() + idx_line.size() || block.index < 1) {
            throw fail(i, ordinal, "expected a positive block index, got '" + std::string(idx_line) + "'");
        }
        if (!blocks.empty() && block.index <= blocks.back().index) {
            throw fail(i, block.index, "block index not strictly increasing");
        }
        ++i;

        if (i >= lines.size()) throw fail(i, block.index, "missing timing line");
        const auto timing = lines[i];
        constexpr std::string_view arrow = " --> ";
        if (timing.size() != 12 + arrow.size() + 12 || timing.substr(12, arrow.size()) != arrow) {
            throw fail(i, block.index, "malformed timing line '" + std::string(timing) + "'");
        }
        try {
            block.start = Timestamp::from_srt(timing.substr(0, 12));
            block.end = Timestamp::from_srt(timing.substr(12 + arrow.size()));
        } catch (const Error& e) {
            throw fail(i, block.index, e.what());
        }
        if (block.start >= block.end) throw fail(i, block.index, "start is not before end");
        if (!blocks.empty() && blocks.back().end > block.start) {
            throw fail(i, block.index, "overlaps the previous block");
        }
        ++i;

        while (i < lines.size() && !is_blank(lines[i])) {
            if (contains_marker(lines[i])) throw fail(i, block.index, "text contains a tag marker");
            block.lines.emplace_back(lines[i]);
            ++i;
        }
        if (block.lines.empty()) throw fail(i, block.index, "empty block text");
        blocks.push_back(std::move(block));
    }
    return SubtitleDocument(std::move(blocks));
}

std::string write_srt(const SubtitleDocument& doc) {
    std::string out;
    int index = 1;
    for (const auto& b : doc.blocks()) {
        if (index > 1) out += '\n';
        out += std::to_string(index++);
        out += '\n';
        out += b.start.to_srt();
        out += " --> ";
        out += b.end.to_srt();
        out += '\n';
        for (const auto& line : b.lines) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

} // namespace subalign
