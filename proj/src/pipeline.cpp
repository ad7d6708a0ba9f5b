#include "mred/pipeline.hpp"

#include "mred/error.hpp"
#include "mred/parallel.hpp"
#include "mred/text.hpp"

namespace mred::pipeline {

std::string config_hash(const nlohmann::json& config) { return text::hex64(text::fnv1a(config.dump())); }

std::vector<std::string> SourceDoc::texts() const {
    std::vector<std::string> out;
    out.reserve(units.size());
    for (const auto& u : units) out.push_back(u.text);
    return out;
}

SourceDoc prepare_source(const std::string& submission_id, std::span<const corpus::Review> reviews,
                         combine::Strategy strategy, const combine::SimilarityProvider& provider,
                         const tagger::TaggerModel* model, const tagger::LabelMap* labels) {
    SourceDoc doc;
    doc.combined = combine::combine(strategy, reviews, provider, submission_id);
    doc.units = combine::sentence_units(doc.combined, reviews);
    if (!model && !labels) return doc;

    corpus::Submission s;
    s.id = submission_id;
    s.reviews.assign(reviews.begin(), reviews.end());
    const auto tagged = tagger::tag_reviews(s, model, labels);
    doc.labels.reserve(doc.units.size());
    for (const auto& u : doc.units)
        doc.labels.push_back(u.review_index ? tagged[*u.review_index][*u.sentence_index].label
                                            : Category::rating_summary);
    return doc;
}

nlohmann::json GenerateOptions::to_json() const {
    return {{"engine", extract::engine_name(engine)},
            {"mode", control::mode_name(mode)},
            {"combine", combine::strategy_name(strategy)},
            {"engine_config", engine_config.to_json()}};
}

std::vector<Category> GenerateRecord::labels() const {
    std::vector<Category> out;
    for (const auto& s : selected)
        if (s.label) out.push_back(*s.label);
    return out;
}

std::pair<std::vector<Category>, std::vector<Category>> GenerateRecord::without_fallbacks() const {
    std::pair<std::vector<Category>, std::vector<Category>> out;
    for (const auto& s : selected) {
        if (s.fallback || !s.label || !s.requested) continue;
        out.first.push_back(*s.label);
        out.second.push_back(*s.requested);
    }
    return out;
}

namespace {

nlohmann::json opt_json(const std::optional<std::size_t>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<std::size_t> opt_size(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::size_t>();
}

}  // namespace

nlohmann::json GenerateRecord::to_json() const {
    nlohmann::json ctrl = nullptr;
    if (control) {
        ctrl = nlohmann::json::array();
        for (Category c : *control) ctrl.push_back(surface_name(c));
    }
    auto sel = nlohmann::json::array();
    for (const auto& s : selected)
        sel.push_back({{"index", opt_json(s.index)},
                       {"text", s.text},
                       {"label", s.label ? nlohmann::json(surface_name(*s.label)) : nlohmann::json(nullptr)},
                       {"fallback", s.fallback},
                       {"requested", s.requested ? nlohmann::json(surface_name(*s.requested)) : nlohmann::json(nullptr)},
                       {"review_index", opt_json(s.review_index)},
                       {"paragraph_index", opt_json(s.paragraph_index)},
                       {"sentence_index", opt_json(s.sentence_index)}});
    return {{"id", id}, {"control", ctrl}, {"selected", sel}, {"text", text}, {"warnings", warnings}};
}

GenerateRecord GenerateRecord::from_json(const nlohmann::json& j) {
    try {
        GenerateRecord r;
        r.id = j.at("id").get<std::string>();
        if (const auto& c = j.at("control"); !c.is_null()) {
            r.control.emplace();
            for (const auto& l : c) r.control->push_back(parse_category(l.get<std::string>()));
        }
        for (const auto& s : j.at("selected")) {
            SelectedSentence ss;
            ss.index = opt_size(s, "index");
            ss.text = s.at("text").get<std::string>();
            if (auto l = s.find("label"); l != s.end() && !l->is_null()) ss.label = parse_category(l->get<std::string>());
            ss.fallback = s.value("fallback", false);
            if (auto q = s.find("requested"); q != s.end() && !q->is_null())
                ss.requested = parse_category(q->get<std::string>());
            ss.review_index = opt_size(s, "review_index");
            ss.paragraph_index = opt_size(s, "paragraph_index");
            ss.sentence_index = opt_size(s, "sentence_index");
            r.selected.push_back(std::move(ss));
        }
        r.text = j.at("text").get<std::string>();
        r.warnings = j.value("warnings", std::vector<std::string>{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed_record", std::string("generate record: ") + e.what());
    }
}

GenerateRecord extract_reviews(const std::string& id, std::span<const corpus::Review> reviews,
                               const std::optional<std::vector<Category>>& control, std::optional<std::size_t> k,
                               const GenerateOptions& options, const combine::SimilarityProvider& provider,
                               const tagger::TaggerModel* model, const tagger::LabelMap* labels) {
    if (control.has_value() == k.has_value()) throw Error("precondition", "exactly one of control and k is required");
    if (control && control->empty()) throw Error("precondition", "control sequence must be nonempty");
    if (control && !model && !labels)
        throw Error("precondition", "controlled extraction needs a tagger model or review labels");

    const auto doc = prepare_source(id, reviews, options.strategy, provider, model, labels);
    GenerateRecord rec;
    rec.id = id;
    rec.control = control;
    if (doc.units.empty()) {
        rec.warnings.push_back("no extractable sentences");
        return rec;
    }
    extract::ExtractRequest req;
    req.sentences = doc.texts();
    if (!doc.labels.empty()) req.labels = doc.labels;
    req.control = control;
    req.k = k;
    auto res = extract::run(req, options.engine, options.engine_config);
    for (const auto& slot : res.selection.slots) {
        const auto& u = doc.units[slot.index];
        rec.selected.push_back(
            {slot.index, u.text, slot.label, slot.fallback, slot.requested, u.review_index, u.paragraph_index,
             u.sentence_index});
    }
    rec.text = std::move(res.text);
    rec.warnings = std::move(res.selection.warnings);
    return rec;
}

GenerateRecord generate(const corpus::Submission& s, const GenerateOptions& options,
                        const combine::SimilarityProvider& provider, const tagger::TaggerModel* model,
                        const tagger::LabelMap* labels) {
    const auto gold = s.meta_review.labels();
    if (gold.empty()) throw Error("precondition", "submission '" + s.id + "' has an empty meta-review");
    switch (options.mode) {
        case control::Mode::unctrl:
            return extract_reviews(s.id, s.reviews, std::nullopt, gold.size(), options, provider, model, labels);
        case control::Mode::sent_ctrl:
            return extract_reviews(s.id, s.reviews, gold, std::nullopt, options, provider, model, labels);
        case control::Mode::seg_ctrl: break;
    }
    throw Error("unsupported", "extractive engines run unctrl or sent-ctrl only");
}

std::vector<GenerateRecord> generate_all(std::span<const corpus::Submission* const> subs,
                                         const GenerateOptions& options, const combine::SimilarityProvider& provider,
                                         const tagger::TaggerModel* model, const tagger::LabelMap* labels,
                                         std::size_t threads) {
    std::vector<GenerateRecord> out(subs.size());
    parallel_for(
        subs.size(), [&](std::size_t i) { out[i] = generate(*subs[i], options, provider, model, labels); }, threads);
    return out;
}

GenerateRecord generic_record(const corpus::Submission& s, const generics::GenericBank& bank) {
    const auto control = s.meta_review.labels();
    const auto a = generics::assemble_generic(bank, control);
    GenerateRecord rec;
    rec.id = s.id;
    rec.control = control;
    for (std::size_t i = 0; i < a.sentences.size(); ++i)
        rec.selected.push_back({std::nullopt, a.sentences[i], a.labels[i], false, a.labels[i], std::nullopt,
                                std::nullopt, std::nullopt});
    rec.text = a.text;
    rec.warnings = a.warnings;
    return rec;
}

metrics::RunOutput to_output(const GenerateRecord& r) { return {r.id, r.text, r.labels()}; }

metrics::RunReference to_reference(const corpus::Submission& s) {
    return {s.id, s.meta_review.text(), s.meta_review.labels(), s.meta_review.decision};
}

metrics::EvalReport evaluate_records(std::span<const GenerateRecord> records,
                                     std::span<const corpus::Submission* const> subs) {
    std::vector<metrics::RunOutput> outs;
    std::vector<metrics::RunReference> refs;
    for (const auto& r : records) outs.push_back(to_output(r));
    for (const auto* s : subs) refs.push_back(to_reference(*s));
    return metrics::evaluate_run(outs, refs);
}

}  // namespace mred::pipeline
