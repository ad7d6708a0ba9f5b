#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/corpus.hpp"

namespace mred::harvest {

/// How one venue year is laid out on the review platform.
struct YearConfig {
    std::string submission_invitation;
    std::string review_suffix = "Official_Review";
    /// Reply invitations (last path segment) that may carry the meta-review.
    std::vector<std::string> meta_suffixes = {"Meta_Review", "Decision", "Acceptance_Decision"};
    /// Content fields tried in order for the meta-review passage.
    std::vector<std::string> meta_text_fields = {"metareview", "comment"};
    std::vector<std::string> decision_fields = {"decision", "recommendation"};
};

struct Config {
    std::string base_url = "https://api.openreview.net";
    std::size_t page_size = 1000;
    std::size_t max_in_flight = 4;
    int retries = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::seconds timeout{30};
    std::map<int, YearConfig> years;

    /// Invitation ids for ICLR 2018-2021.
    static Config defaults();
    static Config from_json(const nlohmann::json& j);
    static Config load(const std::string& path);
};

/// One submission as harvested, before sentence labels exist.
struct HarvestedSubmission {
    std::string id;
    int year = 0;
    std::vector<corpus::Review> reviews;
    std::string meta_review_text;
    std::optional<Decision> decision;

    nlohmann::json to_json() const;
    static HarvestedSubmission from_json(const nlohmann::json& j);
};

struct HarvestCounts {
    std::size_t submissions = 0;
    std::size_t with_reviews = 0;
    std::size_t with_meta_review = 0;
    std::size_t dropped_without_meta_review = 0;
    std::size_t schema_skipped = 0;
};

struct HarvestResult {
    std::vector<nlohmann::json> raw;  ///< submission notes exactly as served
    std::vector<HarvestedSubmission> submissions;  ///< only those with a released meta-review
    HarvestCounts counts;
    std::vector<std::string> warnings;
};

/// Fetches every submission note (with replies) for `year`. Years before
/// 2018 have no released meta-reviews and are rejected up front.
/// Throws Error{"transport_error"} once retries are exhausted.
HarvestResult harvest(const Config& config, int year);

/// Maps one raw note to a harvested submission; nullopt + warning on schema
/// drift. Exposed for tests and offline re-normalization of raw dumps.
std::optional<HarvestedSubmission> normalize_note(const nlohmann::json& note, int year, const YearConfig& cfg,
                                                  std::vector<std::string>& warnings);

/// Produces labeled meta-review sentences for a harvested submission, e.g.
/// from released annotations (gold boundaries) or a tagger run over
/// corpus::segment_sentences(). An empty result drops the submission.
using Labeler = std::function<std::vector<corpus::LabeledSentence>(const HarvestedSubmission&)>;

/// Builds a corpus submission. Returns nullopt when the record cannot
/// satisfy the corpus invariants (no reviews, no labeled meta-review
/// sentence, unknown decision, year out of range).
std::optional<corpus::Submission> to_submission(const HarvestedSubmission& h, const Labeler& labeler);

/// Leading integer of strings like "6: Marginally above acceptance threshold".
std::optional<int> parse_score(const nlohmann::json& v);

}  // namespace mred::harvest
