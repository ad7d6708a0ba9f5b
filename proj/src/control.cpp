#include "mred/control.hpp"

#include "mred/error.hpp"
#include "mred/text.hpp"

namespace mred::control {

Mode parse_mode(std::string_view name) {
    if (name == "unctrl" || name == "none") return Mode::unctrl;
    if (name == "sent-ctrl" || name == "sent_ctrl" || name == "sent") return Mode::sent_ctrl;
    if (name == "seg-ctrl" || name == "seg_ctrl" || name == "seg") return Mode::seg_ctrl;
    throw Error("bad_mode", "unknown control mode '" + std::string(name) + "'");
}

std::string_view mode_name(Mode m) noexcept {
    switch (m) {
        case Mode::unctrl: return "unctrl";
        case Mode::sent_ctrl: return "sent-ctrl";
        case Mode::seg_ctrl: return "seg-ctrl";
    }
    return "unctrl";
}

ControlSequence sent_ctrl(const corpus::MetaReview& meta_review) {
    return {meta_review.labels(), Granularity::sent};
}

ControlSequence seg_ctrl(const corpus::MetaReview& meta_review) {
    return {collapse_runs(meta_review.labels()), Granularity::seg};
}

std::optional<ControlSequence> for_mode(Mode mode, const corpus::MetaReview& meta_review) {
    switch (mode) {
        case Mode::unctrl: return std::nullopt;
        case Mode::sent_ctrl: return sent_ctrl(meta_review);
        case Mode::seg_ctrl: return seg_ctrl(meta_review);
    }
    return std::nullopt;
}

std::vector<Category> parse_labels(std::string_view pipe_separated) {
    std::vector<Category> out;
    std::size_t start = 0;
    while (start <= pipe_separated.size()) {
        auto bar = pipe_separated.find('|', start);
        if (bar == std::string_view::npos) bar = pipe_separated.size();
        auto item = text::trim(pipe_separated.substr(start, bar - start));
        if (item.empty()) {
            if (bar != pipe_separated.size() || !out.empty())
                throw Error("unknown_label", "empty label in control sequence");
        } else {
            // Collapse inner whitespace runs ("rating   summary").
            std::string norm;
            for (auto tok : text::whitespace_tokens(item)) {
                if (!norm.empty()) norm.push_back(' ');
                norm += tok;
            }
            out.push_back(parse_category(norm));
        }
        start = bar + 1;
    }
    return out;
}

std::string prefix_string(const std::vector<Category>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) out += " | ";
        out += surface_name(labels[i]);
    }
    out += " ==>";
    return out;
}

std::string encode_prefix(const std::optional<ControlSequence>& ctrl, std::string_view text) {
    if (!ctrl) return std::string(text);
    return prefix_string(ctrl->labels) + " " + std::string(text);
}

Decoded decode_prefix(std::string_view encoded) {
    const auto arrow = encoded.find("==>");
    if (arrow == std::string_view::npos) return {std::nullopt, std::string(encoded)};
    auto head = encoded.substr(0, arrow);
    if (head.empty() || head.back() != ' ') return {std::nullopt, std::string(encoded)};
    head.remove_suffix(1);
    try {
        auto labels = parse_labels(head);
        if (labels.empty() || prefix_string(labels) != std::string(head) + " ==>")
            return {std::nullopt, std::string(encoded)};
        auto body = encoded.substr(arrow + 3);
        if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        return {std::move(labels), std::string(body)};
    } catch (const Error&) {
        return {std::nullopt, std::string(encoded)};
    }
}

std::string truncate_encoded(std::string_view encoded, std::size_t limit) {
    const auto decoded = decode_prefix(encoded);
    const std::string prefix = decoded.labels ? prefix_string(*decoded.labels) : std::string();
    const std::size_t prefix_tokens = text::word_count(prefix);
    if (limit < prefix_tokens)
        throw Error("limit_too_small", "limit " + std::to_string(limit) + " is smaller than the " +
                                           std::to_string(prefix_tokens) + "-token control prefix");
    const auto body_tokens = text::whitespace_tokens(decoded.body);
    if (prefix_tokens + body_tokens.size() <= limit) return std::string(encoded);

    std::string out = prefix;
    if (decoded.labels) out.push_back(' ');
    const std::size_t keep = limit - prefix_tokens;
    for (std::size_t i = 0; i < keep; ++i) {
        if (i > 0) out.push_back(' ');
        out += body_tokens[i];
    }
    return out;
}

nlohmann::json EncodedRecord::to_json() const {
    nlohmann::json ctrl = nullptr;
    if (control) {
        ctrl = nlohmann::json::array();
        for (Category c : *control) ctrl.push_back(surface_name(c));
    }
    return {{"id", id}, {"control", ctrl}, {"input", input}, {"reference", reference}};
}

EncodedRecord EncodedRecord::from_json(const nlohmann::json& j) {
    EncodedRecord r;
    r.id = j.at("id").get<std::string>();
    if (const auto& c = j.at("control"); !c.is_null()) {
        r.control.emplace();
        for (const auto& l : c) r.control->push_back(parse_category(l.get<std::string>()));
    }
    r.input = j.at("input").get<std::string>();
    r.reference = j.at("reference").get<std::string>();
    return r;
}

EncodedRecord encode_submission(const corpus::Submission& s, combine::Strategy strategy, Mode mode,
                                const combine::SimilarityProvider& provider, std::optional<std::size_t> truncate_to) {
    const auto combined = combine::combine(strategy, s.reviews, provider, s.id);
    const auto ctrl = for_mode(mode, s.meta_review);
    EncodedRecord r;
    r.id = s.id;
    if (ctrl) r.control = ctrl->labels;
    r.input = encode_prefix(ctrl, combined.text());
    if (truncate_to) r.input = truncate_encoded(r.input, *truncate_to);
    r.reference = s.meta_review.text();
    return r;
}

}  // namespace mred::control
