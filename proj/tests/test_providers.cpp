#include <catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "subalign/error.hpp"
#include "subalign/eval.hpp"

using namespace subalign;
using nlohmann::json;

namespace {

// Local embedding service running on an ephemeral port.
class TestServer {
public:
    explicit TestServer(httplib::Server::Handler handler) {
        server_.Post("/v1/embed", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ProviderError& e) {
        return e.what();
    }
    return "no ProviderError";
}

} // namespace

TEST_CASE("file provider serves text and audio vectors", "[providers][file]") {
    const auto p = file_provider_from_string(
        "{\"kind\":\"text\",\"key\":\"Hallo\",\"vector\":[0.6,0.8]}\n"
        "\n"
        "{\"kind\":\"audio\",\"key\":\"ref.wav:0:1000\",\"vector\":[0.6,0.8]}\n");
    const SubtitleDocument doc({TimedBlock{1, Timestamp(0), Timestamp(1000), {"Hallo"}}});
    CHECK(subsonar_score(doc, "ref.wav", "de", *p) == Catch::Approx(1.0));
}

TEST_CASE("file provider names missing keys", "[providers][file]") {
    const auto p = file_provider_from_string("{\"kind\":\"text\",\"key\":\"Hallo\",\"vector\":[1,0]}\n");
    CHECK_THAT(message_of([&] { p->audio_embed("ref.wav", 0, 1000, "de"); }),
               Catch::Matchers::ContainsSubstring("ref.wav:0:1000"));
    CHECK_THAT(message_of([&] { p->text_embed("Tschüss", "de"); }), Catch::Matchers::ContainsSubstring("Tschüss"));
}

TEST_CASE("file provider rejects malformed input", "[providers][file]") {
    CHECK_THROWS_AS(file_provider_from_string("{\"kind\":\"text\",\"key\":\"a\",\"vector\":[1,0,0]}\n"
                                              "{\"kind\":\"audio\",\"key\":\"b\",\"vector\":[1,0,0,0]}\n"),
                    ParseError);
    CHECK_THROWS_AS(file_provider_from_string("not json\n"), ParseError);
    CHECK_THROWS_AS(file_provider_from_string("{\"kind\":\"video\",\"key\":\"a\",\"vector\":[1]}\n"), ParseError);
    CHECK_THROWS_AS(file_provider_from_string("{\"kind\":\"text\",\"key\":\"a\"}\n"), ParseError);
    CHECK_THROWS_AS(file_provider_from_string("{\"kind\":\"text\",\"key\":\"a\",\"vector\":[]}\n"), ParseError);
    CHECK_THROWS_AS(file_provider_from_string("{\"kind\":\"text\",\"key\":\"a\",\"vector\":[\"x\"]}\n"),
                    ParseError);
}

TEST_CASE("file provider reads from disk", "[providers][file]") {
    const auto path = std::filesystem::temp_directory_path() / "subalign_test_embeddings.jsonl";
    {
        std::ofstream out(path);
        out << "{\"kind\":\"text\",\"key\":\"x\",\"vector\":[1,2]}\n";
    }
    CHECK(file_provider(path.string())->text_embed("x", "en") == Embedding{1, 2});
    std::filesystem::remove(path);
    CHECK_THROWS_AS(file_provider(path.string()), Error);
}

TEST_CASE("remote provider speaks the embed protocol", "[providers][remote]") {
    std::vector<json> seen;
    std::mutex mu;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        {
            std::lock_guard lock(mu);
            seen.push_back(body);
        }
        res.set_content(json{{"vector", {0.6, 0.8}}}.dump(), "application/json");
    });
    const auto p = remote_provider(server.url(), 5.0);
    CHECK(p->text_embed("Hallo", "de") == Embedding{0.6, 0.8});
    CHECK(p->audio_embed("talk.wav", 40, 1000, "de") == Embedding{0.6, 0.8});
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == json{{"kind", "text"}, {"lang", "de"}, {"text", "Hallo"}});
    CHECK(seen[1]["kind"] == "audio");
    CHECK(seen[1]["audio_path"] == "talk.wav");
    CHECK(seen[1]["start_ms"] == 40);
    CHECK(seen[1]["end_ms"] == 1000);

    const SubtitleDocument doc({TimedBlock{1, Timestamp(0), Timestamp(1000), {"Hallo"}}});
    CHECK(subsonar_score(doc, "talk.wav", "de", *p) == Catch::Approx(1.0));
}

TEST_CASE("remote provider protocol errors", "[providers][remote]") {
    SECTION("missing vector") {
        TestServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"embedding\":[1]}", "application/json");
        });
        CHECK_THAT(message_of([&] { remote_provider(server.url())->text_embed("a", "en"); }),
                   Catch::Matchers::ContainsSubstring("no \"vector\""));
    }
    SECTION("non-success status") {
        TestServer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
        CHECK_THAT(message_of([&] { remote_provider(server.url())->text_embed("a", "en"); }),
                   Catch::Matchers::ContainsSubstring("HTTP status 503"));
    }
    SECTION("not json") {
        TestServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content("<html>", "text/html");
        });
        CHECK_THAT(message_of([&] { remote_provider(server.url())->text_embed("a", "en"); }),
                   Catch::Matchers::ContainsSubstring("not JSON"));
    }
    SECTION("dimension change") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            const int n = ++calls;
            res.set_content(json{{"vector", std::vector<double>(static_cast<std::size_t>(n + 1), 1.0)}}.dump(),
                            "application/json");
        });
        const auto p = remote_provider(server.url());
        CHECK(p->text_embed("a", "en").size() == 2);
        CHECK_THAT(message_of([&] { p->text_embed("b", "en"); }), Catch::Matchers::ContainsSubstring("dimension"));
    }
}

TEST_CASE("remote provider timeout names the base url", "[providers][remote]") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(400));
        res.set_content("{\"vector\":[1]}", "application/json");
    });
    const auto url = server.url();
    const auto msg = message_of([&] { remote_provider(url, 0.1)->text_embed("a", "en"); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring(url));
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("3 attempts"));
}

TEST_CASE("remote provider rejects bad configuration", "[providers][remote]") {
    CHECK_THROWS_AS(remote_provider("https://example.org"), ValidationError);
    CHECK_THROWS_AS(remote_provider("localhost:8080"), ValidationError);
    CHECK_THROWS_AS(remote_provider("http://localhost:8080", 0.0), ValidationError);
}
