#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "subalign/error.hpp"
#include "subalign/signal.hpp"

namespace subalign {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = line.find_first_not_of(" \t");
    while (pos != std::string_view::npos) {
        const auto end = line.find_first_of(" \t", pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? end : end - pos));
        pos = end == std::string_view::npos ? end : line.find_first_not_of(" \t", end);
    }
    return out;
}

ParseError at_line(std::size_t line_no, const std::string& what) {
    return ParseError("matrix line " + std::to_string(line_no + 1) + ": " + what);
}

double parse_value(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw at_line(line_no, "malformed number '" + std::string(s) + "'");
    }
    return v;
}

std::size_t parse_count(std::string_view s, std::size_t line_no, const char* what) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw at_line(line_no, std::string("malformed ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<double> parse_row(std::string_view line, std::size_t expected, std::size_t line_no,
                              bool allow_neg_inf) {
    const auto fields = split_on(line, '\t');
    if (fields.size() != expected) {
        throw at_line(line_no, "expected " + std::to_string(expected) + " values, found " +
                                   std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(expected);
    for (auto f : fields) {
        const double v = parse_value(f, line_no);
        if (!std::isfinite(v) && !(allow_neg_inf && v == -INFINITY)) {
            throw at_line(line_no, "non-finite value '" + std::string(f) + "'");
        }
        row.push_back(v);
    }
    return row;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void append_row(std::string& out, std::span<const double> row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += '\t';
        out += format_double(row[c]);
    }
    out += '\n';
}

std::string format_frame_header(const FrameTimeMap& map) {
    if (const auto* u = map.as_uniform()) return format_double(u->frame_ms) + "\n";
    std::string out = "frame_times\n";
    append_row(out, map.as_explicit()->end_ms);
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

MatrixFile parse_matrix(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw at_line(0, "missing header");
    const auto header = split_ws(lines[0]);
    const bool posterior = header.size() == 4;
    if (header.size() != 3 && !posterior) {
        throw at_line(0, "header must be 'N L FRAME_MS' or 'L V BLANK FRAME_MS'");
    }
    const std::size_t rows = parse_count(header[0], 0, "row count");
    const std::size_t cols = parse_count(header[1], 0, "column count");
    if (rows == 0 || cols == 0) throw at_line(0, "matrix dimensions must be positive");
    const std::size_t blank = posterior ? parse_count(header[2], 0, "blank index") : 0;
    const auto frame_field = header.back();
    const std::size_t frames = posterior ? rows : cols;

    std::size_t next = 1;
    FrameTimeMap map;
    try {
        if (frame_field == "frame_times") {
            if (lines.size() < 2) throw at_line(1, "missing frame_times line");
            map = FrameTimeMap::explicit_ends(parse_row(lines[1], frames, 1, false));
            next = 2;
        } else {
            map = FrameTimeMap::uniform(parse_value(frame_field, 0));
        }
    } catch (const ValidationError& e) {
        throw at_line(next - 1, e.what());
    }

    if (lines.size() - next != rows) {
        throw ParseError("matrix declares " + std::to_string(rows) + " rows but has " +
                         std::to_string(lines.size() - next));
    }
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = parse_row(lines[next + r], cols, next + r, posterior);
        data.insert(data.end(), row.begin(), row.end());
    }
    Matrix m(rows, cols, std::move(data));
    if (posterior) return CtcPosterior(std::move(m), blank, std::move(map));
    return AttentionMatrix(std::move(m), std::move(map));
}

MatrixFile read_matrix(const std::filesystem::path& path) {
    try {
        return parse_matrix(read_file(path));
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

AttentionMatrix read_attention(const std::filesystem::path& path) {
    auto m = read_matrix(path);
    if (auto* a = std::get_if<AttentionMatrix>(&m)) return std::move(*a);
    throw ParseError(path.string() + ": expected an attention matrix header 'N L FRAME_MS'");
}

CtcPosterior read_posterior(const std::filesystem::path& path) {
    auto m = read_matrix(path);
    if (auto* p = std::get_if<CtcPosterior>(&m)) return std::move(*p);
    throw ParseError(path.string() + ": expected a posterior header 'L V BLANK FRAME_MS'");
}

std::string format_matrix(const AttentionMatrix& a) {
    std::string out = std::to_string(a.values.rows()) + " " + std::to_string(a.values.cols()) + " ";
    out += format_frame_header(a.frame_map);
    for (std::size_t r = 0; r < a.values.rows(); ++r) append_row(out, a.values.row(r));
    return out;
}

std::string format_matrix(const CtcPosterior& p) {
    std::string out = std::to_string(p.logprobs.rows()) + " " + std::to_string(p.logprobs.cols()) + " " +
                      std::to_string(p.blank_index) + " ";
    out += format_frame_header(p.frame_map);
    for (std::size_t r = 0; r < p.logprobs.rows(); ++r) append_row(out, p.logprobs.row(r));
    return out;
}

} // namespace subalign
