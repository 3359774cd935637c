#include <catch_amalgamated.hpp>

#include "subalign/core.hpp"
#include "subalign/error.hpp"
#include "subalign/matrix.hpp"
#include "subalign/synth.hpp"

using namespace subalign;

TEST_CASE("Timestamp formats with zero padding", "[core][srt]") {
    CHECK(Timestamp(0).to_srt() == "00:00:00,000");
    CHECK(Timestamp(3'723'004).to_srt() == "01:02:03,004");
    CHECK(Timestamp(Timestamp::kMaxMs).to_srt() == "99:59:59,999");
    CHECK(Timestamp::from_srt("01:02:03,004").ms == 3'723'004);
    CHECK_THROWS_AS(Timestamp(-1), ValidationError);
    CHECK_THROWS_AS(Timestamp(Timestamp::kMaxMs + 1), ValidationError);
    CHECK_THROWS_AS(Timestamp::from_srt("1:02:03,004"), ParseError);
    CHECK_THROWS_AS(Timestamp::from_srt("01:62:03,004"), ParseError);
    CHECK_THROWS_AS(Timestamp::from_srt("01:02:03.004"), ParseError);
}

TEST_CASE("parse_srt reads a minimal block", "[core][srt]") {
    const auto doc = parse_srt("1\n00:00:00,000 --> 00:00:01,000\nHallo\n");
    REQUIRE(doc.size() == 1);
    const auto& b = doc.blocks()[0];
    CHECK(b.index == 1);
    CHECK(b.start.ms == 0);
    CHECK(b.end.ms == 1000);
    CHECK(b.lines == std::vector<std::string>{"Hallo"});
}

TEST_CASE("parse_srt reads contiguous blocks", "[core][srt]") {
    const std::string text =
        "1\n00:00:00,000 --> 00:00:01,000\nErste Zeile\nzweite Zeile\n\n"
        "2\n00:00:01,000 --> 00:00:02,500\nDrei\n";
    const auto doc = parse_srt(text);
    REQUIRE(doc.size() == 2);
    CHECK(doc.blocks()[0].start.ms == 0);
    CHECK(doc.blocks()[0].end.ms == 1000);
    CHECK(doc.blocks()[0].lines.size() == 2);
    CHECK(doc.blocks()[1].start.ms == 1000);
    CHECK(doc.blocks()[1].end.ms == 2500);
    CHECK(write_srt(doc) == text);
}

TEST_CASE("parse_srt tolerates CRLF, BOM and extra blank lines", "[core][srt]") {
    const auto doc = parse_srt("\xEF\xBB\xBF\r\n1\r\n00:00:00,000 --> 00:00:01,000\r\nHi\r\n\r\n\r\n");
    REQUIRE(doc.size() == 1);
    CHECK(write_srt(doc) == "1\n00:00:00,000 --> 00:00:01,000\nHi\n");
}

TEST_CASE("parse_srt errors name the block and line", "[core][srt]") {
    const auto message_of = [](const std::string& text) {
        try {
            parse_srt(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK_THAT(message_of("1\n00:00:00,000 -> 00:00:01,000\nx\n"),
               Catch::Matchers::ContainsSubstring("block 1") && Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THAT(message_of("1\n00:00:01,000 --> 00:00:01,000\nx\n"),
               Catch::Matchers::ContainsSubstring("start is not before end"));
    CHECK_THAT(message_of("1\n00:00:00,000 --> 00:00:02,000\nx\n\n2\n00:00:01,000 --> 00:00:03,000\ny\n"),
               Catch::Matchers::ContainsSubstring("block 2") && Catch::Matchers::ContainsSubstring("overlaps"));
    CHECK_THAT(message_of("1\n00:00:00,000 --> 00:00:01,000\n"), Catch::Matchers::ContainsSubstring("empty block text"));
    CHECK_THAT(message_of("x\n00:00:00,000 --> 00:00:01,000\ny\n"), Catch::Matchers::ContainsSubstring("block index"));
    CHECK_THAT(message_of("1\n00:00:00,000 --> 00:00:01,000\na <eob>\n"), Catch::Matchers::ContainsSubstring("marker"));
}

TEST_CASE("write_srt emits canonical SRT", "[core][srt]") {
    TimedBlock b{7, Timestamp(0), Timestamp(1000), {"Hallo"}};
    const SubtitleDocument doc({b});
    CHECK(write_srt(doc) == "1\n00:00:00,000 --> 00:00:01,000\nHallo\n");
    CHECK(write_srt(SubtitleDocument{}).empty());
}

TEST_CASE("SRT round trip on random documents", "[core][srt][property]") {
    synth::Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TimedBlock> blocks;
        std::int64_t t = static_cast<std::int64_t>(rng.uniform_index(0, 5000));
        const auto n = rng.uniform_index(1, 6);
        for (std::size_t i = 0; i < n; ++i) {
            TimedBlock b;
            b.index = static_cast<int>(i) + 1;
            b.start = Timestamp(t);
            t += static_cast<std::int64_t>(rng.uniform_index(1, 400'000));
            b.end = Timestamp(t);
            t += static_cast<std::int64_t>(rng.uniform_index(0, 3));
            for (std::size_t l = 0; l < rng.uniform_index(1, 2); ++l) {
                b.lines.push_back("Zeile " + std::to_string(rng.uniform_index(0, 99999)) + " ünïcödé");
            }
            blocks.push_back(b);
        }
        const SubtitleDocument doc(blocks);
        const auto text = write_srt(doc);
        const auto back = parse_srt(text);
        REQUIRE(back == doc);
        REQUIRE(write_srt(back) == text);
    }
}

TEST_CASE("tokens_from_tagged_text computes block boundaries", "[core][tagged]") {
    const auto single = tokens_from_tagged_text("Hello world <eob>");
    CHECK(single.tokens() == std::vector<std::string>{"Hello", "world", "<eob>"});
    CHECK(single.boundaries() == std::vector<std::size_t>{2});

    const auto two = tokens_from_tagged_text("a <eol> b <eob> c <eob>");
    CHECK(two.boundaries() == std::vector<std::size_t>{3, 5});
    CHECK(two.block_lines(0) == std::vector<std::string>{"a", "b"});
    CHECK(two.block_lines(1) == std::vector<std::string>{"c"});
}

TEST_CASE("tokens_from_tagged_text rejects malformed marker structure", "[core][tagged]") {
    CHECK_THROWS_AS(tokens_from_tagged_text("a <eob> <eob>"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text(""), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("   \n\t"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("a <eol> <eob>"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("<eob> a <eob>"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("<eol> a <eob>"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("a <eol> <eol> b <eob>"), ParseError);
    CHECK_THROWS_AS(tokens_from_tagged_text("a <eol>"), ParseError);
}

TEST_CASE("a missing final <eob> is appended with a warning", "[core][tagged]") {
    std::vector<std::string> warnings;
    const auto t = tokens_from_tagged_text("a b <eob> c", &warnings);
    CHECK(t.tokens().back() == "<eob>");
    CHECK(t.boundaries() == std::vector<std::size_t>{2, 4});
    REQUIRE(warnings.size() == 1);
    CHECK_THAT(warnings[0], Catch::Matchers::ContainsSubstring("<eob>"));

    warnings.clear();
    (void)tokens_from_tagged_text("a <eob>", &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("tagged text round trip reproduces the token sequence", "[core][tagged][property]") {
    synth::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> toks;
        const auto blocks = rng.uniform_index(1, 5);
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto words = rng.uniform_index(1, 6);
            for (std::size_t w = 0; w < words; ++w) {
                toks.push_back("t" + std::to_string(rng.uniform_index(0, 50)));
                if (w + 1 < words && rng.uniform() < 0.2) toks.emplace_back("<eol>");
            }
            toks.emplace_back("<eob>");
        }
        const TaggedTokens t(toks);
        const auto again = tokens_from_tagged_text(t.to_text());
        REQUIRE(again.tokens() == toks);
        REQUIRE(again == t);
    }
}

TEST_CASE("assemble_document converts frames to milliseconds", "[core][assemble]") {
    const auto hi = tokens_from_tagged_text("Hi <eob>");
    const auto doc = assemble_document(hi, BlockTimings({{0, 25}}, 25, FrameTimeMap::uniform(40.0)));
    REQUIRE(doc.size() == 1);
    CHECK(doc.blocks()[0].start.ms == 0);
    CHECK(doc.blocks()[0].end.ms == 1000);
    CHECK(doc.blocks()[0].lines == std::vector<std::string>{"Hi"});

    const auto two = tokens_from_tagged_text("a b <eob> c <eob>");
    const auto d2 = assemble_document(two, BlockTimings({{0, 3}, {3, 7}}, 10));
    CHECK(d2.blocks()[0].end == d2.blocks()[1].start);
    CHECK(d2.blocks()[1].end.ms == 280);

    const auto lines = tokens_from_tagged_text("a <eol> b <eob>");
    CHECK(assemble_document(lines, BlockTimings({{0, 1}}, 1)).blocks()[0].lines ==
          std::vector<std::string>{"a", "b"});

    CHECK_THROWS_AS(assemble_document(two, BlockTimings({{0, 3}}, 10)), ValidationError);
}

TEST_CASE("frame boundaries round half away from zero", "[core][assemble]") {
    const auto map = FrameTimeMap::explicit_ends({10.5, 20.4, 30.5});
    CHECK(map.boundary_ms_rounded(1) == 11);
    CHECK(map.boundary_ms_rounded(2) == 20);
    CHECK(map.boundary_ms_rounded(3) == 31);
    const auto t = tokens_from_tagged_text("a <eob> b <eob>");
    const auto doc = assemble_document(t, BlockTimings({{0, 1}, {1, 3}}, 3, map));
    CHECK(doc.blocks()[0].end.ms == 11);
    CHECK(doc.blocks()[1].end.ms == 31);
    CHECK(FrameTimeMap::uniform(12.5).boundary_ms_rounded(1) == 13);
}

TEST_CASE("BlockTimings enforces contiguity", "[core][timings]") {
    CHECK_THROWS_AS(BlockTimings({{1, 2}}, 3), ValidationError);
    CHECK_THROWS_AS(BlockTimings({{0, 2}, {3, 4}}, 5), ValidationError);
    CHECK_THROWS_AS(BlockTimings({{0, 2}, {2, 2}}, 5), ValidationError);
    CHECK_THROWS_AS(BlockTimings({{0, 6}}, 5), ValidationError);
    CHECK(BlockTimings({{0, 2}, {2, 3}}, 5).extended_to_end().ends() == std::vector<std::size_t>{2, 5});
}

TEST_CASE("SubtitleDocument rejects invariant violations", "[core]") {
    TimedBlock a{1, Timestamp(0), Timestamp(1000), {"a"}};
    TimedBlock b{2, Timestamp(900), Timestamp(2000), {"b"}};
    CHECK_THROWS_AS(SubtitleDocument({a, b}), ValidationError);
    b.start = Timestamp(1000);
    b.index = 1;
    CHECK_THROWS_AS(SubtitleDocument({a, b}), ValidationError);
    TimedBlock empty{1, Timestamp(0), Timestamp(10), {}};
    CHECK_THROWS_AS(SubtitleDocument({empty}), ValidationError);
    TimedBlock newline{1, Timestamp(0), Timestamp(10), {"a\nb"}};
    CHECK_THROWS_AS(SubtitleDocument({newline}), ValidationError);
}
