#include "mred/service.hpp"

#include <httplib.h>

#include "mred/analytics.hpp"
#include "mred/control.hpp"
#include "mred/error.hpp"
#include "mred/metrics.hpp"

namespace mred::service {

namespace {

using nlohmann::json;

Response error(int status, const std::string& code, const std::string& message) {
    return {status, {{"code", code}, {"message", message}}};
}

int status_for(const std::string& code) {
    if (code == "provider_failure" || code == "internal") return 500;
    if (code == "not_loaded") return 503;
    return 400;
}

std::vector<Category> parse_control(const json& c) {
    if (c.is_string()) return control::parse_labels(c.get<std::string>());
    std::vector<Category> out;
    for (const auto& l : c) out.push_back(parse_category(l.get<std::string>()));
    return out;
}

std::vector<corpus::Review> parse_reviews(const json& j) {
    if (!j.is_array()) throw Error("bad_request", "'reviews' must be an array");
    std::vector<corpus::Review> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& r = j[i];
        corpus::Review rev;
        if (r.is_string()) {
            rev.text = r.get<std::string>();
        } else {
            rev.text = r.at("text").get<std::string>();
            if (auto it = r.find("rating"); it != r.end() && !it->is_null()) rev.rating = it->get<int>();
            rev.reviewer_id = r.value("reviewer_id", std::string());
        }
        if (rev.reviewer_id.empty()) rev.reviewer_id = "R" + std::to_string(i + 1);
        out.push_back(std::move(rev));
    }
    return out;
}

json tagged_json(const tagger::TaggedReview& tr) {
    auto arr = json::array();
    for (const auto& t : tr)
        arr.push_back({{"text", t.text}, {"label", surface_name(t.label)}, {"confidence", t.confidence}});
    return arr;
}

}  // namespace

State load_state(const std::filesystem::path& corpus_path, const std::filesystem::path& model_path) {
    State s;
    if (!corpus_path.empty()) s.corpus = corpus::load_corpus(corpus_path);
    if (!model_path.empty()) s.model = tagger::TaggerModel::load(model_path);
    return s;
}

Api::Api(State state) : state_(std::move(state)) {
    base_config_ = {{"api", "v1"},
                    {"cue_version", metrics::DecisionCues::builtin().version},
                    {"corpus", state_.corpus ? json(state_.corpus->provenance.source) : json(nullptr)},
                    {"corpus_submissions", state_.corpus ? state_.corpus->submissions.size() : 0},
                    {"model", state_.model ? json(pipeline::config_hash(state_.model->to_json())) : json(nullptr)}};
    base_hash_ = pipeline::config_hash(base_config_);

    if (state_.corpus) {
        const auto& subs = state_.corpus->submissions;
        json splits = json::object();
        for (auto sp : {corpus::Split::train, corpus::Split::validation, corpus::Split::test, corpus::Split::unassigned})
            splits[std::string(corpus::split_name(sp))] = state_.corpus->split(sp).size();
        stats_ = {{"submissions", subs.size()},
                  {"reviews", state_.corpus->review_count()},
                  {"sentences", state_.corpus->sentence_count()},
                  {"splits", splits},
                  {"category_distribution", analytics::category_distribution(subs).to_json()}};
        transition_ = analytics::transition_matrix(subs).to_json();
    }
}

std::string Api::hash_with(const json& extra) const {
    return pipeline::config_hash({{"service", base_config_}, {"request", extra}});
}

Response Api::health() const {
    return {200,
            {{"status", "ok"},
             {"corpus_loaded", state_.corpus.has_value()},
             {"model_loaded", state_.model.has_value()},
             {"config_hash", base_hash_}}};
}

Response Api::corpus_stats() const {
    if (!state_.corpus) return error(503, "not_loaded", "no corpus loaded");
    auto body = stats_;
    auto palette = json::object();
    for (Category c : kAllCategories) palette[std::string(surface_name(c))] = analytics::category_color(c);
    body["palette"] = palette;
    body["config_hash"] = base_hash_;
    return {200, body};
}

Response Api::corpus_transition() const {
    if (!state_.corpus) return error(503, "not_loaded", "no corpus loaded");
    auto body = transition_;
    body["config_hash"] = base_hash_;
    return {200, body};
}

Response Api::tag(const json& request) const {
    if (!state_.model) return error(503, "not_loaded", "no tagger model loaded");
    std::optional<Decision> decision;
    const json* sentences = nullptr;
    if (request.is_array()) {
        sentences = &request;
    } else if (request.is_object()) {
        if (auto d = request.find("decision"); d != request.end() && !d->is_null())
            decision = parse_decision(d->get<std::string>());
        if (auto it = request.find("reviews"); it != request.end()) {
            auto out = json::array();
            for (const auto& r : parse_reviews(*it))
                out.push_back(tagged_json(tagger::predict(*state_.model, corpus::review_sentences(r), decision)));
            return {200, {{"reviews", out}, {"config_hash", base_hash_}}};
        }
        if (auto it = request.find("sentences"); it != request.end()) sentences = &*it;
    }
    if (!sentences || !sentences->is_array())
        return error(400, "bad_request", "expected an array of sentences, {sentences: [...]} or {reviews: [...]}");
    const auto texts = sentences->get<std::vector<std::string>>();
    return {200,
            {{"sentences", tagged_json(tagger::predict(*state_.model, texts, decision))}, {"config_hash", base_hash_}}};
}

Response Api::generate(const json& request) const {
    if (!request.is_object()) return error(400, "bad_request", "expected a JSON object");
    const auto reviews = parse_reviews(request.at("reviews"));
    if (reviews.empty()) return error(400, "bad_request", "at least one review is required");

    pipeline::GenerateOptions opt;
    opt.engine = extract::parse_engine(request.value("engine", std::string("textrank")));
    opt.strategy = combine::parse_strategy(request.value("combine", std::string("concat")));
    if (auto c = request.find("config"); c != request.end() && !c->is_null())
        opt.engine_config = extract::EngineConfig::from_json(*c);

    std::optional<std::vector<Category>> ctrl;
    std::optional<std::size_t> k;
    if (auto c = request.find("control"); c != request.end() && !c->is_null()) ctrl = parse_control(*c);
    if (auto kk = request.find("k"); kk != request.end() && !kk->is_null()) k = kk->get<std::size_t>();
    opt.mode = ctrl ? control::Mode::sent_ctrl : control::Mode::unctrl;
    if (ctrl && !state_.model) return error(503, "not_loaded", "controlled generation needs a tagger model");

    const combine::TfidfSimilarity provider;
    const auto rec = pipeline::extract_reviews("request", reviews, ctrl, k, opt, provider,
                                               state_.model ? &*state_.model : nullptr);
    auto sentences = json::array();
    for (const auto& s : rec.selected) {
        auto opt_index = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
        sentences.push_back({{"text", s.text},
                             {"label", s.label ? json(surface_name(*s.label)) : json(nullptr)},
                             {"requested", s.requested ? json(surface_name(*s.requested)) : json(nullptr)},
                             {"fallback", s.fallback},
                             {"source",
                              {{"review_index", opt_index(s.review_index)},
                               {"paragraph_index", opt_index(s.paragraph_index)},
                               {"sentence_index", opt_index(s.sentence_index)}}}});
    }
    json ctrl_json = nullptr;
    if (ctrl) {
        ctrl_json = json::array();
        for (Category c : *ctrl) ctrl_json.push_back(surface_name(c));
    }
    auto cfg = opt.to_json();
    cfg["k"] = k ? json(*k) : json(nullptr);
    return {200,
            {{"text", rec.text},
             {"sentences", sentences},
             {"control", ctrl_json},
             {"warnings", rec.warnings},
             {"config_hash", hash_with(cfg)}}};
}

Response Api::evaluate(const json& request) const {
    if (!request.is_object()) return error(400, "bad_request", "expected a JSON object");
    std::vector<metrics::RunOutput> outs;
    std::vector<metrics::RunReference> refs;
    auto labels_of = [](const json& j) {
        std::vector<Category> out;
        if (auto it = j.find("labels"); it != j.end() && !it->is_null()) out = parse_control(*it);
        return out;
    };
    for (const auto& o : request.at("outputs"))
        outs.push_back({o.at("id").get<std::string>(), o.at("text").get<std::string>(), labels_of(o)});
    for (const auto& r : request.at("references")) {
        metrics::RunReference ref{r.at("id").get<std::string>(), r.at("text").get<std::string>(), labels_of(r),
                                  std::nullopt};
        if (auto d = r.find("decision"); d != r.end() && !d->is_null()) ref.decision = parse_decision(d->get<std::string>());
        refs.push_back(std::move(ref));
    }
    auto body = metrics::evaluate_run(outs, refs).to_json(request.value("instances", false));
    body["config_hash"] = base_hash_;
    return {200, body};
}

Response Api::handle(const std::string& method, const std::string& path, const std::string& body) const {
    try {
        if (method == "GET") {
            if (path == "/v1/health") return health();
            if (path == "/v1/corpus/stats") return corpus_stats();
            if (path == "/v1/corpus/transition") return corpus_transition();
        } else if (method == "POST") {
            if (body.size() > kMaxPayload) return error(413, "payload_too_large", "request body exceeds 2 MB");
            json req;
            try {
                req = json::parse(body);
            } catch (const json::parse_error& e) {
                return error(400, "bad_json", e.what());
            }
            if (path == "/v1/tag") return tag(req);
            if (path == "/v1/generate") return generate(req);
            if (path == "/v1/evaluate") return evaluate(req);
        }
        return error(404, "not_found", method + " " + path + " is not an endpoint");
    } catch (const Error& e) {
        return error(status_for(e.code()), e.code(), e.what());
    } catch (const json::exception& e) {
        return error(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return error(500, "internal", e.what());
    }
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
    std::string host = "127.0.0.1";
    std::string port = bind;
    if (auto colon = bind.rfind(':'); colon != std::string::npos) {
        if (colon > 0) host = bind.substr(0, colon);
        port = bind.substr(colon + 1);
    } else if (bind.find_first_not_of("0123456789") != std::string::npos) {
        return {bind, 8080};
    }
    if (port.empty()) return {host, 8080};
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
        return {host, p};
    } catch (const std::exception&) {
        throw Error("bad_bind", "invalid bind address '" + bind + "'");
    }
}

std::unique_ptr<httplib::Server> make_server(const Api& api) {
    auto srv = std::make_unique<httplib::Server>();
    srv->set_payload_max_length(kMaxPayload);

    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    for (const char* path : {"/v1/health", "/v1/corpus/stats", "/v1/corpus/transition"})
        srv->Get(path, [&api, reply, path](const httplib::Request&, httplib::Response& res) {
            reply(res, api.handle("GET", path, ""));
        });
    for (const char* path : {"/v1/tag", "/v1/generate", "/v1/evaluate"})
        srv->Post(path, [&api, reply, path](const httplib::Request& req, httplib::Response& res) {
            reply(res, api.handle("POST", path, req.body));
        });
    if (api.state().static_dir) srv->set_mount_point("/", api.state().static_dir->string());

    srv->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        const std::string code = res.status == 413 ? "payload_too_large" : res.status == 404 ? "not_found" : "http_error";
        res.set_content(json{{"code", code}, {"message", req.method + " " + req.path + ": HTTP " +
                                                             std::to_string(res.status)}}
                            .dump(),
                        "application/json");
        return httplib::Server::HandlerResponse::Handled;
    });
    return srv;
}

void serve(const Api& api, const std::string& bind) {
    const auto [host, port] = parse_bind(bind);
    auto srv = make_server(api);
    if (!srv->bind_to_port(host, port)) throw Error("bind_failure", "cannot bind " + host + ":" + std::to_string(port));
    srv->listen_after_bind();
}

}  // namespace mred::service
