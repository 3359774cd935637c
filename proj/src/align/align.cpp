#include <string>

#include "subalign/align.hpp"
#include "subalign/error.hpp"

namespace subalign {

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::dtw: return "dtw";
    case Method::sbaam: return "sbaam";
    case Method::ctcseg: return "ctcseg";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    if (name == "dtw") return Method::dtw;
    if (name == "sbaam") return Method::sbaam;
    if (name == "ctcseg") return Method::ctcseg;
    throw ValidationError("unknown alignment method '" + std::string(name) + "' (expected dtw, sbaam or ctcseg)");
}

BlockTimings align_timings(const AlignInputs& in, const AlignConfig& cfg) {
    BlockTimings timings = [&] {
        switch (cfg.method) {
        case Method::dtw:
        case Method::sbaam:
            if (!in.attention) throw ValidationError(std::string(to_string(cfg.method)) + " needs an attention matrix");
            return cfg.method == Method::dtw ? dtw_align(*in.attention, in.tokens, cfg.attention)
                                             : sbaam_align(*in.attention, in.tokens, cfg.attention);
        case Method::ctcseg:
            if (!in.posterior || !in.vocab) throw ValidationError("ctcseg needs a posterior and a vocabulary");
            return ctc_forced_align(*in.posterior, in.tokens, *in.vocab);
        }
        throw ValidationError("unknown alignment method");
    }();
    return cfg.extend_last ? timings.extended_to_end() : timings;
}

SubtitleDocument align(const AlignInputs& in, const AlignConfig& cfg) {
    return assemble_document(in.tokens, align_timings(in, cfg));
}

} // namespace subalign
