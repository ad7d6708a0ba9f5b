#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/combine.hpp"
#include "mred/corpus.hpp"

namespace mred::control {

enum class Granularity { sent, seg };

struct ControlSequence {
    std::vector<Category> labels;
    Granularity granularity = Granularity::sent;

    bool operator==(const ControlSequence&) const = default;
};

enum class Mode { unctrl, sent_ctrl, seg_ctrl };

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode m) noexcept;

/// One label per meta-review sentence.
ControlSequence sent_ctrl(const corpus::MetaReview& meta_review);
/// sent_ctrl collapsed to maximal runs.
ControlSequence seg_ctrl(const corpus::MetaReview& meta_review);
std::optional<ControlSequence> for_mode(Mode mode, const corpus::MetaReview& meta_review);

/// "abstract | rating summary | decision" -> labels. Accepts surface and
/// storage names; throws Error{"unknown_label"}.
std::vector<Category> parse_labels(std::string_view pipe_separated);
/// "abstract | rating summary ==>"
std::string prefix_string(const std::vector<Category>& labels);

/// "<l1> | <l2> ==> <text>", or `text` unchanged without a control sequence.
std::string encode_prefix(const std::optional<ControlSequence>& ctrl, std::string_view text);

struct Decoded {
    std::optional<std::vector<Category>> labels;
    std::string body;
};
/// Inverse of encode_prefix for bodies that do not contain "==>".
Decoded decode_prefix(std::string_view encoded);

/// Keeps the control prefix whole and truncates the body to `limit` total
/// whitespace tokens. Returns the input unchanged when it already fits.
/// Throws Error{"limit_too_small"} when the prefix alone exceeds `limit`.
std::string truncate_encoded(std::string_view encoded, std::size_t limit);

/// One line of the encoded-input handoff file.
struct EncodedRecord {
    std::string id;
    std::optional<std::vector<Category>> control;
    std::string input;
    std::string reference;

    nlohmann::json to_json() const;
    static EncodedRecord from_json(const nlohmann::json& j);
};

EncodedRecord encode_submission(const corpus::Submission& s, combine::Strategy strategy, Mode mode,
                                const combine::SimilarityProvider& provider,
                                std::optional<std::size_t> truncate_to = std::nullopt);

}  // namespace mred::control
