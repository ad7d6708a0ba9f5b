#include "mred/harvest.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "mred/error.hpp"
#include "mred/text.hpp"

namespace mred::harvest {

using nlohmann::json;

Config Config::defaults() {
    Config c;
    YearConfig y2018;
    y2018.submission_invitation = "ICLR.cc/2018/Conference/-/Blind_Submission";
    y2018.meta_suffixes = {"Acceptance_Decision", "Decision", "Meta_Review"};
    y2018.meta_text_fields = {"comment", "metareview"};
    YearConfig y2019;
    y2019.submission_invitation = "ICLR.cc/2019/Conference/-/Blind_Submission";
    y2019.meta_suffixes = {"Meta_Review", "Decision"};
    y2019.meta_text_fields = {"metareview", "comment"};
    y2019.decision_fields = {"recommendation", "decision"};
    YearConfig y2020;
    y2020.submission_invitation = "ICLR.cc/2020/Conference/-/Blind_Submission";
    y2020.meta_suffixes = {"Decision", "Meta_Review"};
    y2020.meta_text_fields = {"comment", "metareview"};
    YearConfig y2021;
    y2021.submission_invitation = "ICLR.cc/2021/Conference/-/Blind_Submission";
    y2021.meta_suffixes = {"Decision", "Meta_Review"};
    y2021.meta_text_fields = {"comment", "metareview"};
    c.years = {{2018, y2018}, {2019, y2019}, {2020, y2020}, {2021, y2021}};
    return c;
}

Config Config::from_json(const json& j) {
    Config c = defaults();
    c.base_url = j.value("base_url", c.base_url);
    c.page_size = j.value("page_size", c.page_size);
    c.max_in_flight = std::max<std::size_t>(1, j.value("max_in_flight", c.max_in_flight));
    c.retries = j.value("retries", c.retries);
    c.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long>(c.backoff.count())));
    c.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(c.timeout.count())));
    if (auto it = j.find("years"); it != j.end()) {
        for (const auto& [key, yj] : it->items()) {
            const int year = std::stoi(key);
            YearConfig y = c.years.contains(year) ? c.years[year] : YearConfig{};
            y.submission_invitation = yj.value("submission_invitation", y.submission_invitation);
            y.review_suffix = yj.value("review_suffix", y.review_suffix);
            y.meta_suffixes = yj.value("meta_suffixes", y.meta_suffixes);
            y.meta_text_fields = yj.value("meta_text_fields", y.meta_text_fields);
            y.decision_fields = yj.value("decision_fields", y.decision_fields);
            c.years[year] = std::move(y);
        }
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open harvest config " + path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error("bad_config", "harvest config " + path + ": " + e.what());
    }
}

json HarvestedSubmission::to_json() const {
    json reviews_j = json::array();
    for (const auto& r : reviews) {
        reviews_j.push_back({{"reviewer_id", r.reviewer_id},
                             {"text", r.text},
                             {"rating", r.rating ? json(*r.rating) : json(nullptr)},
                             {"confidence", r.confidence ? json(*r.confidence) : json(nullptr)}});
    }
    return {{"id", id},
            {"year", year},
            {"decision", decision ? json(decision_name(*decision)) : json(nullptr)},
            {"reviews", std::move(reviews_j)},
            {"meta_review_text", meta_review_text}};
}

HarvestedSubmission HarvestedSubmission::from_json(const json& j) {
    HarvestedSubmission h;
    h.id = j.at("id").get<std::string>();
    h.year = j.at("year").get<int>();
    if (const auto& d = j.at("decision"); !d.is_null()) h.decision = parse_decision(d.get<std::string>());
    for (const auto& rj : j.at("reviews")) {
        corpus::Review r;
        r.reviewer_id = rj.at("reviewer_id").get<std::string>();
        r.text = rj.at("text").get<std::string>();
        if (rj.contains("rating") && !rj["rating"].is_null()) r.rating = rj["rating"].get<int>();
        if (rj.contains("confidence") && !rj["confidence"].is_null()) r.confidence = rj["confidence"].get<int>();
        h.reviews.push_back(std::move(r));
    }
    h.meta_review_text = j.value("meta_review_text", "");
    return h;
}

std::optional<int> parse_score(const json& v) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number()) return static_cast<int>(v.get<double>());
    if (v.is_object() && v.contains("value")) return parse_score(v["value"]);
    if (!v.is_string()) return std::nullopt;
    const auto s = v.get<std::string>();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) return std::nullopt;
    return std::stoi(s.substr(i, j - i));
}

namespace {

// Last path segment: ".../-/Paper1/Official_Review" and
// ".../Paper1/-/Official_Review" both give "Official_Review".
std::string invitation_suffix(const std::string& invitation) {
    const auto pos = invitation.rfind('/');
    return pos == std::string::npos ? invitation : invitation.substr(pos + 1);
}

const json* content_of(const json& note) {
    auto it = note.find("content");
    return it != note.end() && it->is_object() ? &*it : nullptr;
}

std::optional<std::string> text_field(const json& content, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        auto it = content.find(name);
        if (it == content.end()) continue;
        const json& v = it->is_object() && it->contains("value") ? (*it)["value"] : *it;
        if (v.is_string() && !text::trim(v.get<std::string>()).empty()) return v.get<std::string>();
    }
    return std::nullopt;
}

std::optional<Decision> decision_from(const std::string& s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower.find("accept") != std::string::npos) return Decision::accept;
    if (lower.find("reject") != std::string::npos || lower.find("workshop") != std::string::npos)
        return Decision::reject;
    return std::nullopt;
}

}  // namespace

std::optional<HarvestedSubmission> normalize_note(const json& note, int year, const YearConfig& cfg,
                                                  std::vector<std::string>& warnings) {
    if (!note.is_object() || !note.contains("id") || !note["id"].is_string()) {
        warnings.push_back("schema: submission note without string id skipped");
        return std::nullopt;
    }
    HarvestedSubmission h;
    h.id = note["id"].get<std::string>();
    h.year = year;

    const json* replies = nullptr;
    if (auto d = note.find("details"); d != note.end() && d->is_object()) {
        if (auto r = d->find("replies"); r != d->end() && r->is_array()) replies = &*r;
        else if (auto r2 = d->find("directReplies"); r2 != d->end() && r2->is_array()) replies = &*r2;
    }
    if (!replies) {
        warnings.push_back("schema: note " + h.id + " has no details.replies; skipped");
        return std::nullopt;
    }

    std::size_t anon = 0;
    for (const auto& reply : *replies) {
        if (!reply.is_object()) continue;
        std::string invitation;
        if (auto it = reply.find("invitation"); it != reply.end() && it->is_string()) invitation = *it;
        else if (auto its = reply.find("invitations"); its != reply.end() && its->is_array() && !its->empty())
            invitation = (*its)[0].get<std::string>();
        const auto suffix = invitation_suffix(invitation);
        const json* content = content_of(reply);
        if (!content) continue;

        if (suffix == cfg.review_suffix) {
            auto body = text_field(*content, {"review", "main_review", "summary_of_the_review"});
            if (!body) {
                warnings.push_back("schema: review without text in " + h.id + "; review skipped");
                continue;
            }
            corpus::Review r;
            if (auto sig = reply.find("signatures"); sig != reply.end() && sig->is_array() && !sig->empty()) {
                const auto full = (*sig)[0].get<std::string>();
                r.reviewer_id = full.substr(full.rfind('/') + 1);
            } else {
                r.reviewer_id = "R" + std::to_string(++anon);
            }
            r.text = *body;
            if (auto it = content->find("rating"); it != content->end()) r.rating = parse_score(*it);
            if (auto it = content->find("confidence"); it != content->end()) r.confidence = parse_score(*it);
            if (r.rating && (*r.rating < corpus::kMinRating || *r.rating > corpus::kMaxRating)) r.rating.reset();
            h.reviews.push_back(std::move(r));
            continue;
        }

        if (std::find(cfg.meta_suffixes.begin(), cfg.meta_suffixes.end(), suffix) == cfg.meta_suffixes.end())
            continue;
        if (h.meta_review_text.empty()) {
            if (auto t = text_field(*content, cfg.meta_text_fields)) h.meta_review_text = *t;
        }
        if (!h.decision) {
            if (auto d = text_field(*content, cfg.decision_fields)) h.decision = decision_from(*d);
        }
    }
    return h;
}

std::optional<corpus::Submission> to_submission(const HarvestedSubmission& h, const Labeler& labeler) {
    if (h.reviews.empty() || !h.decision || text::trim(h.meta_review_text).empty()) return std::nullopt;
    if (h.year < corpus::kFirstYear || h.year > corpus::kLastYear) return std::nullopt;
    corpus::Submission s;
    s.id = h.id;
    s.year = h.year;
    s.reviews = h.reviews;
    s.meta_review.decision = *h.decision;
    s.meta_review.sentences = labeler(h);
    std::erase_if(s.meta_review.sentences,
                  [](const corpus::LabeledSentence& ls) { return text::trim(ls.text).empty(); });
    if (s.meta_review.sentences.empty()) return std::nullopt;
    return s;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("bad_config", "endpoint must be an http(s) URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        e.prefix = url.substr(path_start);
        while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    }
    return e;
}

std::string url_encode(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

json fetch_page(const Config& cfg, const Endpoint& ep, const std::string& invitation, std::size_t offset) {
    const std::string path = ep.prefix + "/notes?invitation=" + url_encode(invitation) +
                             "&details=replies&offset=" + std::to_string(offset) +
                             "&limit=" + std::to_string(cfg.page_size);
    std::string last_error;
    auto delay = cfg.backoff;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        httplib::Client client(ep.origin);
        client.set_connection_timeout(cfg.timeout);
        client.set_read_timeout(cfg.timeout);
        auto res = client.Get(path);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw Error("transport_error", "GET " + path + " returned HTTP " + std::to_string(res->status));
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw Error("transport_error", "GET " + path + " returned invalid JSON: " + e.what());
        }
    }
    throw Error("transport_error", "GET " + ep.origin + path + " failed after " + std::to_string(cfg.retries + 1) +
                                       " attempts: " + last_error);
}

}  // namespace

HarvestResult harvest(const Config& config, int year) {
    if (year < corpus::kFirstYear)
        throw Error("precondition", "year " + std::to_string(year) +
                                        ": meta-reviews are not released before 2018");
    if (year > corpus::kLastYear) throw Error("precondition", "year " + std::to_string(year) + " is outside 2018-2021");
    auto yit = config.years.find(year);
    if (yit == config.years.end()) throw Error("bad_config", "no invitation configured for year " + std::to_string(year));
    const YearConfig& ycfg = yit->second;
    const Endpoint ep = parse_endpoint(config.base_url);

    json first = fetch_page(config, ep, ycfg.submission_invitation, 0);
    std::vector<json> pages;
    pages.push_back(first);
    const std::size_t total = first.value("count", std::size_t{0});

    std::vector<std::size_t> offsets;
    if (total > 0) {
        for (std::size_t off = config.page_size; off < total; off += config.page_size) offsets.push_back(off);
    }
    // Bounded concurrency: at most max_in_flight requests outstanding.
    for (std::size_t b = 0; b < offsets.size(); b += config.max_in_flight) {
        std::vector<std::future<json>> batch;
        for (std::size_t k = b; k < std::min(offsets.size(), b + config.max_in_flight); ++k) {
            batch.push_back(std::async(std::launch::async, fetch_page, std::cref(config), std::cref(ep),
                                       std::cref(ycfg.submission_invitation), offsets[k]));
        }
        for (auto& f : batch) pages.push_back(f.get());
    }
    // Without a count field, keep paging until a short page arrives.
    if (total == 0 && first.contains("notes") && first["notes"].size() == config.page_size) {
        std::size_t off = config.page_size;
        while (true) {
            json page = fetch_page(config, ep, ycfg.submission_invitation, off);
            const auto n = page.contains("notes") ? page["notes"].size() : 0;
            pages.push_back(std::move(page));
            if (n < config.page_size) break;
            off += config.page_size;
        }
    }

    HarvestResult result;
    for (const auto& page : pages) {
        auto it = page.find("notes");
        if (it == page.end() || !it->is_array()) {
            result.warnings.push_back("schema: page without 'notes' array skipped");
            continue;
        }
        for (const auto& note : *it) {
            result.raw.push_back(note);
            ++result.counts.submissions;
            auto h = normalize_note(note, year, ycfg, result.warnings);
            if (!h) {
                ++result.counts.schema_skipped;
                continue;
            }
            if (!h->reviews.empty()) ++result.counts.with_reviews;
            if (text::trim(h->meta_review_text).empty()) {
                ++result.counts.dropped_without_meta_review;
                continue;
            }
            ++result.counts.with_meta_review;
            result.submissions.push_back(std::move(*h));
        }
    }
    return result;
}

}  // namespace mred::harvest
