#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "subalign/align.hpp"
#include "subalign/cli.hpp"
#include "subalign/core.hpp"
#include "subalign/defaults.hpp"
#include "subalign/error.hpp"
#include "subalign/eval.hpp"
#include "subalign/signal.hpp"
#include "subalign/synth.hpp"

namespace subalign::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path + "'");
}

SubtitleDocument load_srt(const std::string& path) {
    try {
        return parse_srt(slurp(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

struct AlignArgs {
    std::string method;
    std::string tokens;
    std::string attention;
    std::string posterior;
    std::string vocab;
    std::optional<std::size_t> utterance;
    std::optional<double> frame_ms;
    double eps = defaults::kClipEps;
    std::size_t median_width = defaults::kMedianWidth;
    bool extend_last = false;
    bool skip_eob_row = false;
    bool raw = false;
    std::string output;
};

struct EvalArgs {
    std::string srt;
    int cpl = defaults::kCplLimit;
    double cps = defaults::kCpsLimit;
    std::string hyp;
    std::string ref;
    std::int64_t threshold_ms = defaults::kShiftThresholdMs;
    std::vector<std::string> srts;
    std::vector<std::string> audios;
    std::string lang;
    std::string embeddings;
    std::string provider_url;
    double timeout_s = 30.0;
    std::size_t jobs = 1;
    std::string labels_a;
    std::string labels_b;
    bool quiet = false;
};

struct GenArgs {
    std::size_t blocks = 0;
    std::size_t frames = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double frame_ms = defaults::kFrameMs;
    std::string output;
};

TaggedTokens load_tokens(const AlignArgs& a, std::ostream& err) {
    auto text = slurp(a.tokens);
    if (a.utterance) {
        std::istringstream lines(text);
        std::string line;
        std::size_t k = 0;
        bool found = false;
        while (std::getline(lines, line)) {
            if (++k == *a.utterance) {
                found = true;
                break;
            }
        }
        if (!found) throw ValidationError(a.tokens + ": no utterance on line " + std::to_string(*a.utterance));
        text = line;
    }
    std::vector<std::string> warnings;
    auto tokens = tokens_from_tagged_text(text, &warnings);
    for (const auto& w : warnings) err << "warning: " << a.tokens << ": " << w << "\n";
    return tokens;
}

int cmd_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
    const auto method = method_from_string(a.method);
    if (method == Method::ctcseg) {
        if (a.posterior.empty() || a.vocab.empty()) throw UsageError("--method ctcseg needs --posterior and --vocab");
        if (!a.attention.empty()) throw UsageError("--method ctcseg takes --posterior, not --attention");
    } else {
        if (a.attention.empty()) throw UsageError("--method " + a.method + " needs --attention");
        if (!a.posterior.empty() || !a.vocab.empty()) {
            throw UsageError("--method " + a.method + " takes --attention, not --posterior/--vocab");
        }
    }

    AlignInputs in{load_tokens(a, err), std::nullopt, std::nullopt, std::nullopt};
    if (method == Method::ctcseg) {
        in.posterior = read_posterior(a.posterior);
        if (a.frame_ms) in.posterior->frame_map = FrameTimeMap::uniform(*a.frame_ms);
        in.vocab = read_vocab(a.vocab);
    } else {
        in.attention = read_attention(a.attention);
        if (a.frame_ms) in.attention->frame_map = FrameTimeMap::uniform(*a.frame_ms);
    }

    AlignConfig cfg;
    cfg.method = method;
    cfg.extend_last = a.extend_last;
    cfg.attention.preprocess = !a.raw;
    cfg.attention.eps = a.eps;
    cfg.attention.median_width = a.median_width;
    cfg.attention.skip_eob_row = a.skip_eob_row;

    const auto timings = align_timings(in, cfg);
    const auto doc = assemble_document(in.tokens, timings);
    if (a.output == "-") {
        out << "index\tstart_frame\tend_frame\tstart_ms\tend_ms\ttext\n";
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const auto& b = doc.blocks()[i];
            const auto& iv = timings.intervals()[i];
            out << b.index << '\t' << iv.begin << '\t' << iv.end << '\t' << b.start.ms << '\t' << b.end.ms << '\t'
                << b.text() << '\n';
        }
    } else {
        spit(a.output, write_srt(doc));
    }
    return kOk;
}

void emit(std::ostream& out, const json& report) { out << report.dump() << "\n"; }

int cmd_conformity(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto report = conformity(load_srt(a.srt), a.cpl, a.cps);
    json blocks = json::array();
    for (const auto& b : report.blocks) {
        blocks.push_back({{"index", b.index},
                          {"max_line_chars", b.max_line_chars},
                          {"text_chars", b.text_chars},
                          {"cps", b.cps},
                          {"cpl_ok", b.cpl_ok},
                          {"cps_ok", b.cps_ok}});
    }
    emit(out, {{"cpl_conform_pct", report.cpl_conform_pct},
               {"cps_conform_pct", report.cps_conform_pct},
               {"cpl_limit", report.cpl_limit},
               {"cps_limit", report.cps_limit},
               {"num_blocks", report.blocks.size()},
               {"blocks", blocks}});
    if (!a.quiet) {
        err << "block  max_cpl  cps      cpl  cps\n";
        for (const auto& b : report.blocks) {
            err << std::setw(5) << b.index << "  " << std::setw(7) << b.max_line_chars << "  " << std::setw(7)
                << std::fixed << std::setprecision(2) << b.cps << "  " << (b.cpl_ok ? "ok " : "BAD") << "  "
                << (b.cps_ok ? "ok" : "BAD") << "\n";
        }
        err << "CPL conform " << report.cpl_conform_pct << "%, CPS conform " << report.cps_conform_pct << "%\n";
    }
    return kOk;
}

int cmd_shift(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto report = shift_stats(load_srt(a.hyp), load_srt(a.ref), a.threshold_ms);
    json blocks = json::array();
    for (const auto& b : report.blocks) {
        blocks.push_back({{"index", b.index},
                          {"start_shift_ms", b.start_shift_ms},
                          {"end_shift_ms", b.end_shift_ms},
                          {"start_edited", b.start_edited},
                          {"end_edited", b.end_edited}});
    }
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    emit(out, {{"edited_start_pct", report.edited_start_pct},
               {"edited_end_pct", report.edited_end_pct},
               {"edited_avg_pct", report.edited_avg_pct},
               {"edited_timestamps", report.edited_count},
               {"mean_abs_shift_ms", opt(report.mean_abs_shift_ms)},
               {"std_abs_shift_ms", opt(report.std_abs_shift_ms)},
               {"threshold_ms", report.threshold_ms},
               {"num_blocks", report.blocks.size()},
               {"blocks", blocks}});
    if (!a.quiet) {
        err << "block  start_shift  end_shift\n";
        for (const auto& b : report.blocks) {
            err << std::setw(5) << b.index << "  " << std::setw(11) << b.start_shift_ms << "  " << std::setw(9)
                << b.end_shift_ms << "\n";
        }
        err << std::fixed << std::setprecision(2) << "edited start " << report.edited_start_pct << "%, end "
            << report.edited_end_pct << "%, avg " << report.edited_avg_pct << "%";
        if (report.mean_abs_shift_ms) {
            err << "; |shift| " << *report.mean_abs_shift_ms << " +- " << *report.std_abs_shift_ms << " ms";
        }
        err << "\n";
    }
    return kOk;
}

int cmd_subsonar(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    if (a.srts.size() != a.audios.size()) throw UsageError("give one --audio per --srt");
    std::string url = a.provider_url;
    if (a.embeddings.empty() && url.empty()) {
        if (const char* env = std::getenv("SUBALIGN_PROVIDER_URL"); env && *env) url = env;
    }
    if (a.embeddings.empty() == url.empty()) {
        throw UsageError("give exactly one of --embeddings or --provider-url (or SUBALIGN_PROVIDER_URL)");
    }
    const auto provider = a.embeddings.empty() ? remote_provider(url, a.timeout_s) : file_provider(a.embeddings);

    std::vector<std::vector<double>> per_file(a.srts.size());
    const std::size_t jobs = std::max<std::size_t>(1, a.jobs);
    for (std::size_t first = 0; first < a.srts.size(); first += jobs) {
        std::vector<std::future<std::vector<double>>> pending;
        for (std::size_t i = first; i < std::min(first + jobs, a.srts.size()); ++i) {
            pending.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&, i] {
                try {
                    return subsonar_block_scores(load_srt(a.srts[i]), a.audios[i], a.lang, *provider);
                } catch (const Error& e) {
                    throw Error(a.srts[i] + ": " + e.what());
                }
            }));
        }
        for (std::size_t k = 0; k < pending.size(); ++k) per_file[first + k] = pending[k].get();
    }

    json files = json::array();
    double mean_sum = 0.0, pooled_sum = 0.0;
    std::size_t pooled_n = 0;
    for (std::size_t i = 0; i < per_file.size(); ++i) {
        double s = 0.0;
        for (double v : per_file[i]) s += v;
        const double mean = s / static_cast<double>(per_file[i].size());
        mean_sum += mean;
        pooled_sum += s;
        pooled_n += per_file[i].size();
        files.push_back({{"srt", a.srts[i]}, {"audio", a.audios[i]}, {"score", mean}, {"num_blocks", per_file[i].size()}});
        if (!a.quiet) err << a.srts[i] << ": SubSONAR " << std::fixed << std::setprecision(4) << mean << "\n";
    }
    const double file_mean = mean_sum / static_cast<double>(per_file.size());
    const double pooled = pooled_sum / static_cast<double>(pooled_n);
    emit(out, {{"lang", a.lang},
               {"files", files},
               {"mean_of_files", file_mean},
               {"pooled_mean", pooled},
               {"num_blocks", pooled_n}});
    if (!a.quiet) err << "mean of files " << file_mean << ", pooled " << pooled << "\n";
    return kOk;
}

std::vector<bool> load_labels(const std::string& path) {
    std::istringstream in(slurp(path));
    std::vector<bool> labels;
    std::string tok;
    while (in >> tok) {
        std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
        if (tok == "1" || tok == "true" || tok == "yes" || tok == "y") labels.push_back(true);
        else if (tok == "0" || tok == "false" || tok == "no" || tok == "n") labels.push_back(false);
        else throw ParseError(path + ": label '" + tok + "' is not boolean");
    }
    return labels;
}

int cmd_kappa(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto la = load_labels(a.labels_a);
    const auto lb = load_labels(a.labels_b);
    // vector<bool> has no contiguous storage to view as a span
    const auto ba = std::make_unique<bool[]>(la.size());
    const auto bb = std::make_unique<bool[]>(lb.size());
    std::copy(la.begin(), la.end(), ba.get());
    std::copy(lb.begin(), lb.end(), bb.get());
    const auto r = cohen_kappa_detail({ba.get(), la.size()}, {bb.get(), lb.size()});
    emit(out, {{"kappa", r.kappa}, {"observed_agreement", r.observed}, {"expected_agreement", r.expected}, {"n", r.n}});
    if (!a.quiet) err << "kappa " << r.kappa << " (p_o " << r.observed << ", p_e " << r.expected << ", n " << r.n << ")\n";
    return kOk;
}

int cmd_gen(const GenArgs& g, std::ostream& out) {
    const auto spec = synth::random_alignment(g.blocks, g.frames, g.noise, g.seed, g.frame_ms);
    synth::write_fixture(g.output, spec);
    out << g.output << "\n";
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Subtitle block timestamp alignment and evaluation", "subalign"};
    app.require_subcommand(1);

    AlignArgs al;
    auto* align_cmd = app.add_subcommand("align", "Assign block timestamps from attention or CTC posteriors");
    align_cmd->add_option("--method", al.method, "dtw | sbaam | ctcseg")
        ->required()
        ->check(CLI::IsMember({"dtw", "sbaam", "ctcseg"}));
    align_cmd->add_option("--tokens", al.tokens, "Tagged subtitle text")->required()->check(CLI::ExistingFile);
    align_cmd->add_option("--utterance", al.utterance, "Use line K (1-based) of the tokens file")
        ->check(CLI::PositiveNumber);
    auto* att = align_cmd->add_option("--attention", al.attention, "Attention matrix")->check(CLI::ExistingFile);
    auto* post = align_cmd->add_option("--posterior", al.posterior, "CTC log-posterior matrix")->check(CLI::ExistingFile);
    att->excludes(post);
    align_cmd->add_option("--vocab", al.vocab, "label_id<TAB>token file")->check(CLI::ExistingFile);
    align_cmd->add_option("--frame-ms", al.frame_ms, "Override frame duration (ms)")->check(CLI::PositiveNumber);
    align_cmd->add_option("--eps", al.eps, "SBAAM negative clip value")->capture_default_str()->check(CLI::PositiveNumber);
    align_cmd->add_option("--median-width", al.median_width, "DTW median filter width (odd)")
        ->capture_default_str()
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                const auto w = std::strtoll(s.c_str(), nullptr, 10);
                return (w > 0 && w % 2 == 1) ? std::string{} : std::string("median width must be odd and positive");
            },
            "ODD"));
    align_cmd->add_flag("--extend-last", al.extend_last, "Stretch the last block to the end of the audio");
    align_cmd->add_flag("--skip-eob-row", al.skip_eob_row, "SBAAM: next block's rows start after the <eob> row");
    align_cmd->add_flag("--raw", al.raw, "Use the matrix as given, without normalization/filtering/clipping");
    align_cmd->add_option("-o,--output", al.output, "Output SRT, or - for TSV on stdout")->required();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate subtitle timing and quality");
    eval_cmd->require_subcommand(1);
    eval_cmd->add_flag("--quiet", ev.quiet, "No table on stderr");

    auto* conf_cmd = eval_cmd->add_subcommand("conformity", "CPL/CPS conformity");
    conf_cmd->add_option("srt", ev.srt, "Subtitle file")->required()->check(CLI::ExistingFile);
    conf_cmd->add_option("--cpl", ev.cpl, "Characters per line limit")->capture_default_str()->check(CLI::PositiveNumber);
    conf_cmd->add_option("--cps", ev.cps, "Characters per second limit")->capture_default_str()->check(CLI::PositiveNumber);
    conf_cmd->add_flag("--quiet", ev.quiet);

    auto* shift_cmd = eval_cmd->add_subcommand("shift", "Timestamp shifts against a post-edited reference");
    shift_cmd->add_option("--hyp", ev.hyp)->required()->check(CLI::ExistingFile);
    shift_cmd->add_option("--ref", ev.ref)->required()->check(CLI::ExistingFile);
    shift_cmd->add_option("--threshold-ms", ev.threshold_ms, "Ignore shifts up to this size (120 = perception limit)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    shift_cmd->add_flag("--quiet", ev.quiet);

    auto* sonar_cmd = eval_cmd->add_subcommand("subsonar", "Text/audio embedding similarity per block");
    sonar_cmd->add_option("--srt", ev.srts, "Subtitle file (repeatable)")->required()->check(CLI::ExistingFile);
    sonar_cmd->add_option("--audio", ev.audios, "Audio reference per --srt")->required();
    sonar_cmd->add_option("--lang", ev.lang, "Language code")->required();
    auto* emb = sonar_cmd->add_option("--embeddings", ev.embeddings, "JSON-lines embedding file")->check(CLI::ExistingFile);
    auto* url = sonar_cmd->add_option("--provider-url", ev.provider_url, "Embedding service base URL");
    emb->excludes(url);
    sonar_cmd->add_option("--timeout", ev.timeout_s, "Provider timeout (s)")->capture_default_str()->check(CLI::PositiveNumber);
    sonar_cmd->add_option("--jobs", ev.jobs, "Files scored in parallel")->capture_default_str()->check(CLI::PositiveNumber);
    sonar_cmd->add_flag("--quiet", ev.quiet);

    auto* kappa_cmd = eval_cmd->add_subcommand("kappa", "Cohen's kappa between two binary annotations");
    kappa_cmd->add_option("--a", ev.labels_a, "Labels of annotator A")->required()->check(CLI::ExistingFile);
    kappa_cmd->add_option("--b", ev.labels_b, "Labels of annotator B")->required()->check(CLI::ExistingFile);
    kappa_cmd->add_flag("--quiet", ev.quiet);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic block-diagonal fixture");
    gen_cmd->add_option("--blocks", gen.blocks)->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--frames", gen.frames)->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--noise", gen.noise, "Gaussian noise std")->required()->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--seed", gen.seed)->required();
    gen_cmd->add_option("--frame-ms", gen.frame_ms)->capture_default_str()->check(CLI::PositiveNumber);
    gen_cmd->add_option("-o,--output", gen.output, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "subalign: " << e.what() << "\n";
        return e.get_exit_code() == 0 ? kOk : kUsage;
    }

    try {
        if (align_cmd->parsed()) return cmd_align(al, out, err);
        if (gen_cmd->parsed()) return cmd_gen(gen, out);
        if (conf_cmd->parsed()) return cmd_conformity(ev, out, err);
        if (shift_cmd->parsed()) return cmd_shift(ev, out, err);
        if (sonar_cmd->parsed()) return cmd_subsonar(ev, out, err);
        if (kappa_cmd->parsed()) return cmd_kappa(ev, out, err);
        err << "subalign: no command\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "subalign: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "subalign: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace subalign::cli
