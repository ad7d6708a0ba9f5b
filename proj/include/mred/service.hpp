#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mred/corpus.hpp"
#include "mred/pipeline.hpp"
#include "mred/tagger.hpp"

namespace httplib {
class Server;
}

namespace mred::service {

inline constexpr std::size_t kMaxPayload = 2 * 1024 * 1024;

/// Everything the handlers read. Immutable once the service starts.
struct State {
    std::optional<corpus::Corpus> corpus;
    std::optional<tagger::TaggerModel> model;
    std::optional<std::filesystem::path> static_dir;
};

/// Loads the corpus and model; either path may be empty. Throws on load failure.
State load_state(const std::filesystem::path& corpus_path, const std::filesystem::path& model_path);

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Routes one request without any networking; the HTTP server and the tests
/// go through here. GET requests ignore `body`.
class Api {
public:
    explicit Api(State state);

    Response handle(const std::string& method, const std::string& path, const std::string& body) const;

    const State& state() const noexcept { return state_; }
    const std::string& base_hash() const noexcept { return base_hash_; }

    Response health() const;
    Response corpus_stats() const;
    Response corpus_transition() const;
    Response tag(const nlohmann::json& request) const;
    Response generate(const nlohmann::json& request) const;
    Response evaluate(const nlohmann::json& request) const;

private:
    std::string hash_with(const nlohmann::json& extra) const;

    State state_;
    nlohmann::json base_config_;
    std::string base_hash_;
    nlohmann::json stats_;
    nlohmann::json transition_;
};

/// "host:port"; host defaults to 127.0.0.1 and port to 8080.
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Builds an httplib server around `api` (which must outlive it): the /v1
/// routes, the payload cap, JSON error bodies, and the optional static mount.
std::unique_ptr<httplib::Server> make_server(const Api& api);

/// Blocks serving on `bind`. Throws Error{"bind_failure"}.
void serve(const Api& api, const std::string& bind);

}  // namespace mred::service
