#include "mred/combine.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mred/error.hpp"
#include "mred/similarity.hpp"
#include "mred/text.hpp"

namespace mred::combine {

std::vector<std::vector<double>> TfidfSimilarity::similarity(const std::vector<Paragraph>& queries,
                                                             const std::vector<Paragraph>& targets) const {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(queries.size() + targets.size());
    for (const auto& p : queries) docs.push_back(text::content_tokens(p.text));
    for (const auto& p : targets) docs.push_back(text::content_tokens(p.text));
    const auto vecs = sim::tfidf_vectors(docs);
    std::vector<std::vector<double>> out(queries.size(), std::vector<double>(targets.size(), 0.0));
    for (std::size_t i = 0; i < queries.size(); ++i)
        for (std::size_t j = 0; j < targets.size(); ++j) out[i][j] = sim::cosine(vecs[i], vecs[queries.size() + j]);
    return out;
}

ExternalVectorSimilarity ExternalVectorSimilarity::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open vectors file " + path.string());
    std::map<Key, std::vector<double>> vectors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            Key key{j.value("submission_id", std::string()), j.at("review_id").get<std::string>(),
                    j.at("paragraph_index").get<std::size_t>()};
            vectors[key] = j.at("vector").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed_record", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ExternalVectorSimilarity(std::move(vectors));
}

const std::vector<double>& ExternalVectorSimilarity::lookup(const Paragraph& p) const {
    auto it = vectors_.find({p.submission_id, p.review_id, p.paragraph_index});
    if (it == vectors_.end() && !p.submission_id.empty()) it = vectors_.find({"", p.review_id, p.paragraph_index});
    if (it == vectors_.end())
        throw Error("provider_failure", "no vector for submission '" + p.submission_id + "' review '" + p.review_id +
                                            "' paragraph " + std::to_string(p.paragraph_index));
    return it->second;
}

std::vector<std::vector<double>> ExternalVectorSimilarity::similarity(const std::vector<Paragraph>& queries,
                                                                      const std::vector<Paragraph>& targets) const {
    std::vector<std::vector<double>> out(queries.size(), std::vector<double>(targets.size(), 0.0));
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = lookup(queries[i]);
        for (std::size_t j = 0; j < targets.size(); ++j) out[i][j] = sim::cosine(q, lookup(targets[j]));
    }
    return out;
}

std::string CombinedInput::text() const {
    if (!rating_prefix) return body;
    return *rating_prefix + " " + body;
}

Strategy parse_strategy(std::string_view name) {
    if (name == "concat") return Strategy::concat;
    if (name == "rate-concat" || name == "rate_concat") return Strategy::rate_concat;
    if (name == "merge") return Strategy::merge;
    if (name == "rate-merge" || name == "rate_merge") return Strategy::rate_merge;
    if (name == "longest" || name == "longest-review" || name == "longest_review") return Strategy::longest;
    throw Error("bad_strategy", "unknown combination strategy '" + std::string(name) + "'");
}

std::string_view strategy_name(Strategy s) noexcept {
    switch (s) {
        case Strategy::concat: return "concat";
        case Strategy::rate_concat: return "rate-concat";
        case Strategy::merge: return "merge";
        case Strategy::rate_merge: return "rate-merge";
        case Strategy::longest: return "longest";
    }
    return "concat";
}

namespace {

void require_reviews(std::span<const corpus::Review> reviews) {
    if (reviews.empty()) throw Error("precondition", "at least one review is required");
}

}  // namespace

CombinedInput concat(std::span<const corpus::Review> reviews) {
    require_reviews(reviews);
    CombinedInput out;
    for (std::size_t i = 0; i < reviews.size(); ++i) {
        if (i > 0) out.body += kSeparator;
        const auto begin = out.body.size();
        out.body += reviews[i].text;
        out.spans.push_back({begin, out.body.size(), reviews[i].reviewer_id, i, std::nullopt});
    }
    return out;
}

std::string rating_sentence(std::span<const corpus::Review> reviews) {
    require_reviews(reviews);
    std::string out;
    for (std::size_t i = 0; i < reviews.size(); ++i) {
        if (!reviews[i].rating)
            throw Error("missing_rating", "review '" + reviews[i].reviewer_id + "' has no rating");
        if (i > 0) out += ", ";
        out += "R" + std::to_string(i + 1) + " rating score: " + std::to_string(*reviews[i].rating);
    }
    out += ".";
    return out;
}

CombinedInput rate_concat(std::span<const corpus::Review> reviews) {
    auto prefix = rating_sentence(reviews);
    auto out = concat(reviews);
    out.rating_prefix = std::move(prefix);
    return out;
}

std::size_t longest_index(std::span<const corpus::Review> reviews) {
    require_reviews(reviews);
    std::size_t best = 0, best_words = text::word_count(reviews[0].text);
    for (std::size_t i = 1; i < reviews.size(); ++i) {
        const auto w = text::word_count(reviews[i].text);
        if (w > best_words) {
            best = i;
            best_words = w;
        }
    }
    return best;
}

CombinedInput merge(std::span<const corpus::Review> reviews, const SimilarityProvider& provider,
                    const std::string& submission_id) {
    const std::size_t backbone = longest_index(reviews);

    auto paragraphs_of = [&](std::size_t r) {
        std::vector<Paragraph> out;
        auto paras = corpus::split_paragraphs(reviews[r].text);
        for (std::size_t p = 0; p < paras.size(); ++p)
            out.push_back({submission_id, reviews[r].reviewer_id, r, p, std::move(paras[p])});
        return out;
    };

    const auto backbone_paras = paragraphs_of(backbone);
    std::vector<Paragraph> foreign;
    for (std::size_t r = 0; r < reviews.size(); ++r) {
        if (r == backbone) continue;
        auto ps = paragraphs_of(r);
        std::move(ps.begin(), ps.end(), std::back_inserter(foreign));
    }

    // attached[b] = foreign paragraphs placed after backbone paragraph b, in
    // (review order, paragraph order).
    std::vector<std::vector<const Paragraph*>> attached(backbone_paras.size());
    if (!foreign.empty() && !backbone_paras.empty()) {
        const auto scores = provider.similarity(foreign, backbone_paras);
        for (std::size_t f = 0; f < foreign.size(); ++f) {
            std::size_t best = 0;
            for (std::size_t b = 1; b < backbone_paras.size(); ++b)
                if (scores[f][b] > scores[f][best]) best = b;
            attached[best].push_back(&foreign[f]);
        }
    }

    CombinedInput out;
    auto append = [&](const Paragraph& p) {
        if (!out.body.empty()) out.body += "\n\n";
        const auto begin = out.body.size();
        out.body += p.text;
        out.spans.push_back({begin, out.body.size(), p.review_id, p.review_index, p.paragraph_index});
    };
    for (std::size_t b = 0; b < backbone_paras.size(); ++b) {
        append(backbone_paras[b]);
        for (const Paragraph* p : attached[b]) append(*p);
    }
    return out;
}

CombinedInput rate_merge(std::span<const corpus::Review> reviews, const SimilarityProvider& provider,
                         const std::string& submission_id) {
    auto prefix = rating_sentence(reviews);
    auto out = merge(reviews, provider, submission_id);
    out.rating_prefix = std::move(prefix);
    return out;
}

CombinedInput longest_review(std::span<const corpus::Review> reviews) {
    const auto i = longest_index(reviews);
    CombinedInput out;
    out.body = reviews[i].text;
    out.spans.push_back({0, out.body.size(), reviews[i].reviewer_id, i, std::nullopt});
    return out;
}

CombinedInput combine(Strategy strategy, std::span<const corpus::Review> reviews, const SimilarityProvider& provider,
                      const std::string& submission_id) {
    switch (strategy) {
        case Strategy::concat: return concat(reviews);
        case Strategy::rate_concat: return rate_concat(reviews);
        case Strategy::merge: return merge(reviews, provider, submission_id);
        case Strategy::rate_merge: return rate_merge(reviews, provider, submission_id);
        case Strategy::longest: return longest_review(reviews);
    }
    return concat(reviews);
}

std::vector<SourceSentence> sentence_units(const CombinedInput& input, std::span<const corpus::Review> reviews) {
    std::vector<SourceSentence> out;
    if (input.rating_prefix) out.push_back({*input.rating_prefix, std::nullopt, std::nullopt, std::nullopt});

    // Per review: sentence offset of each paragraph within review_sentences().
    std::vector<std::vector<std::size_t>> para_offset(reviews.size());
    std::vector<std::vector<std::vector<std::string>>> para_sents(reviews.size());
    for (std::size_t r = 0; r < reviews.size(); ++r) {
        std::size_t offset = 0;
        for (const auto& para : corpus::split_paragraphs(reviews[r].text)) {
            para_offset[r].push_back(offset);
            para_sents[r].push_back(corpus::segment_sentences(para));
            offset += para_sents[r].back().size();
        }
    }

    for (const auto& span : input.spans) {
        if (span.review_index >= reviews.size()) continue;
        const auto r = span.review_index;
        auto emit_paragraph = [&](std::size_t p) {
            for (std::size_t k = 0; k < para_sents[r][p].size(); ++k)
                out.push_back({para_sents[r][p][k], r, p, para_offset[r][p] + k});
        };
        if (span.paragraph) {
            if (*span.paragraph < para_sents[r].size()) emit_paragraph(*span.paragraph);
        } else {
            for (std::size_t p = 0; p < para_sents[r].size(); ++p) emit_paragraph(p);
        }
    }
    return out;
}

}  // namespace mred::combine
