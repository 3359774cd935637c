#include <cmath>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "subalign/error.hpp"
#include "subalign/eval.hpp"

namespace subalign {

namespace {

using nlohmann::json;

Embedding parse_vector(const json& v, const std::string& context) {
    if (!v.is_array() || v.empty()) throw ProviderError(context + ": \"vector\" must be a non-empty array");
    Embedding out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw ProviderError(context + ": non-numeric vector entry");
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw ProviderError(context + ": non-finite vector entry");
        out.push_back(d);
    }
    return out;
}

class FileProvider final : public EmbeddingProvider {
public:
    explicit FileProvider(std::string_view jsonl) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos < jsonl.size()) {
            auto nl = jsonl.find('\n', pos);
            if (nl == std::string_view::npos) nl = jsonl.size();
            const auto line = jsonl.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

            const auto where = "embeddings line " + std::to_string(line_no);
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ParseError(where + ": " + e.what());
            }
            if (!obj.is_object() || !obj.contains("kind") || !obj.contains("key") || !obj.contains("vector") ||
                !obj["kind"].is_string() || !obj["key"].is_string()) {
                throw ParseError(where + ": expected {\"kind\",\"key\",\"vector\"}");
            }
            const auto kind = obj["kind"].get<std::string>();
            if (kind != "text" && kind != "audio") throw ParseError(where + ": kind must be text or audio");
            Embedding vec;
            try {
                vec = parse_vector(obj["vector"], where);
            } catch (const ProviderError& e) {
                throw ParseError(e.what());
            }
            if (dim_ == 0) dim_ = vec.size();
            if (vec.size() != dim_) {
                throw ParseError(where + ": dimension " + std::to_string(vec.size()) + " differs from " +
                                 std::to_string(dim_));
            }
            auto& table = kind == "text" ? texts_ : audio_;
            table[obj["key"].get<std::string>()] = std::move(vec);
        }
    }

    Embedding text_embed(const std::string& text, const std::string&) override {
        return lookup(texts_, text, "text");
    }

    Embedding audio_embed(const std::string& audio_ref, std::int64_t start_ms, std::int64_t end_ms,
                          const std::string&) override {
        return lookup(audio_, audio_key(audio_ref, start_ms, end_ms), "audio");
    }

private:
    static Embedding lookup(const std::unordered_map<std::string, Embedding>& table, const std::string& key,
                            const char* kind) {
        const auto it = table.find(key);
        if (it == table.end()) throw ProviderError(std::string("no ") + kind + " embedding for key \"" + key + "\"");
        return it->second;
    }

    std::size_t dim_ = 0;
    std::unordered_map<std::string, Embedding> texts_;
    std::unordered_map<std::string, Embedding> audio_;
};

class RemoteProvider final : public EmbeddingProvider {
public:
    RemoteProvider(std::string base_url, double timeout_s) : base_url_(std::move(base_url)) {
        static const std::regex url_re(R"(^(http://[^/]+)(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(base_url_, m, url_re)) {
            throw ValidationError("provider URL must look like http://host[:port][/prefix], got '" + base_url_ + "'");
        }
        origin_ = m[1].str();
        path_ = m[2].matched ? m[2].str() : "";
        while (!path_.empty() && path_.back() == '/') path_.pop_back();
        path_ += "/embed";
        if (!(timeout_s > 0.0)) throw ValidationError("provider timeout must be positive");
        timeout_s_ = timeout_s;
    }

    Embedding text_embed(const std::string& text, const std::string& lang) override {
        return request({{"kind", "text"}, {"lang", lang}, {"text", text}});
    }

    Embedding audio_embed(const std::string& audio_ref, std::int64_t start_ms, std::int64_t end_ms,
                          const std::string& lang) override {
        return request({{"kind", "audio"},
                        {"lang", lang},
                        {"audio_path", audio_ref},
                        {"start_ms", start_ms},
                        {"end_ms", end_ms}});
    }

private:
    static constexpr int kRetries = 2;

    Embedding request(const json& body) {
        const auto payload = body.dump();
        const auto context = "POST " + origin_ + path_ + " (" +
                             body["kind"].get<std::string>() + ")";
        // A client per request keeps concurrent callers independent.
        httplib::Client client(origin_);
        const auto secs = static_cast<time_t>(timeout_s_);
        const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        std::string last_error;
        for (int attempt = 0; attempt <= kRetries; ++attempt) {
            auto res = client.Post(path_, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                throw ProviderError(context + ": HTTP status " + std::to_string(res->status));
            }
            json reply;
            try {
                reply = json::parse(res->body);
            } catch (const json::parse_error&) {
                throw ProviderError(context + ": response is not JSON");
            }
            if (!reply.is_object() || !reply.contains("vector")) {
                throw ProviderError(context + ": response has no \"vector\"");
            }
            auto vec = parse_vector(reply["vector"], context);
            std::lock_guard lock(mutex_);
            if (dim_ == 0) dim_ = vec.size();
            if (vec.size() != dim_) {
                throw ProviderError(context + ": dimension " + std::to_string(vec.size()) + " differs from " +
                                    std::to_string(dim_));
            }
            return vec;
        }
        throw ProviderError(context + ": failed after " + std::to_string(kRetries + 1) +
                            " attempts: " + last_error);
    }

    std::string base_url_;
    std::string origin_;
    std::string path_;
    double timeout_s_ = 30.0;
    std::mutex mutex_;
    std::size_t dim_ = 0;
};

} // namespace

std::unique_ptr<EmbeddingProvider> file_provider_from_string(std::string_view jsonl) {
    return std::make_unique<FileProvider>(jsonl);
}

std::unique_ptr<EmbeddingProvider> file_provider(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return file_provider_from_string(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::unique_ptr<EmbeddingProvider> remote_provider(const std::string& base_url, double timeout_s) {
    return std::make_unique<RemoteProvider>(base_url, timeout_s);
}

} // namespace subalign
