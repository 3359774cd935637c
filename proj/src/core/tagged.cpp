#include <string>

#include "subalign/core.hpp"
#include "subalign/error.hpp"

namespace subalign {

TokenKind classify_token(std::string_view token) noexcept {
    if (token == kEobMarker) return TokenKind::eob;
    if (token == kEolMarker) return TokenKind::eol;
    return TokenKind::word;
}

TaggedTokens::TaggedTokens(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) throw ParseError("tagged text is empty");

    bool block_has_word = false;
    TokenKind prev = TokenKind::eob;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto kind = classify_token(tokens_[i]);
        if (kind == TokenKind::word) {
            block_has_word = true;
        } else {
            if (i > 0 && prev != TokenKind::word) {
                throw ParseError("consecutive markers at token " + std::to_string(i) + " ('" +
                                 tokens_[i - 1] + " " + tokens_[i] + "')");
            }
            if (!block_has_word) {
                throw ParseError("block " + std::to_string(boundaries_.size() + 1) +
                                 " has no word tokens");
            }
            if (kind == TokenKind::eob) {
                boundaries_.push_back(i);
                block_has_word = false;
            }
        }
        prev = kind;
    }
    if (prev != TokenKind::eob) throw ParseError("tagged text does not end with <eob>");
}

TokenKind TaggedTokens::kind(std::size_t i) const { return classify_token(tokens_.at(i)); }

std::vector<std::string> TaggedTokens::block_lines(std::size_t b) const {
    const std::size_t first = b == 0 ? 0 : boundaries_.at(b - 1) + 1;
    const std::size_t last = boundaries_.at(b);
    std::vector<std::string> lines;
    std::string current;
    for (std::size_t i = first; i < last; ++i) {
        if (classify_token(tokens_[i]) == TokenKind::eol) {
            lines.push_back(std::move(current));
            current.clear();
            continue;
        }
        if (!current.empty()) current += ' ';
        current += tokens_[i];
    }
    lines.push_back(std::move(current));
    return lines;
}

std::string TaggedTokens::to_text() const {
    std::string out;
    for (const auto& t : tokens_) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

TaggedTokens tokens_from_tagged_text(std::string_view text, std::vector<std::string>* warnings) {
    std::vector<std::string> tokens;
    constexpr std::string_view ws = " \t\r\n\v\f";
    std::size_t pos = text.find_first_not_of(ws);
    while (pos != std::string_view::npos) {
        const auto end = text.find_first_of(ws, pos);
        tokens.emplace_back(text.substr(pos, end == std::string_view::npos ? end : end - pos));
        pos = end == std::string_view::npos ? end : text.find_first_not_of(ws, end);
    }
    if (tokens.empty()) throw ParseError("tagged text is empty");
    if (classify_token(tokens.back()) != TokenKind::eob) {
        tokens.emplace_back(kEobMarker);
        if (warnings) warnings->push_back("missing final <eob>; appended one");
    }
    return TaggedTokens(std::move(tokens));
}

} // namespace subalign
