#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/category.hpp"

namespace mred::metrics {

struct Score {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Clipped n-gram overlap over text::rouge_tokens. Zero when either side has
/// no n-grams.
Score rouge_n(std::string_view candidate, std::string_view reference, int n);
Score rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, int n);

/// LCS over the whole token stream (no sentence splitting).
Score rouge_l(std::string_view candidate, std::string_view reference);
Score rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

std::size_t levenshtein(std::span<const Category> a, std::span<const Category> b);

/// 1 - levenshtein / max(|pred|, |gold|). Throws Error{"precondition"} on an
/// empty gold sequence.
double structure_similarity(std::span<const Category> pred, std::span<const Category> gold);

/// Accept/reject phrase lists; see data/decision_cues.json.
struct DecisionCues {
    int version = 0;
    std::vector<std::string> accept;
    std::vector<std::string> reject;

    /// The lexicon compiled into the library.
    static const DecisionCues& builtin();
    static DecisionCues from_json(const nlohmann::json& j);
    static DecisionCues load(const std::filesystem::path& path);
};

struct CueHits {
    std::vector<std::string> accept;
    std::vector<std::string> reject;
};

CueHits find_cues(std::string_view text, const DecisionCues& cues = DecisionCues::builtin());

/// 1 when the gold polarity's cues fire and the other polarity's do not.
int decision_correctness(std::string_view generated, Decision gold,
                         const DecisionCues& cues = DecisionCues::builtin());

struct RunOutput {
    std::string id;
    std::string text;
    std::vector<Category> labels;
};

struct RunReference {
    std::string id;
    std::string text;
    std::vector<Category> labels;
    std::optional<Decision> decision;
};

struct InstanceMetrics {
    std::string id;
    Score r1, r2, rl;
    std::optional<double> structure_sim_sent;
    std::optional<double> structure_sim_seg;
    std::optional<int> decision_correct;
};

struct EvalReport {
    double r1 = 0, r2 = 0, rl = 0;
    double structure_sim_sent = 0, structure_sim_seg = 0;
    double decision_correct = 0;
    std::size_t n_instances = 0;
    /// Instances that contributed to the structure and decision means.
    std::size_t n_structure = 0;
    std::size_t n_decision = 0;
    int cue_version = 0;
    std::vector<InstanceMetrics> instances;

    nlohmann::json to_json(bool with_instances = false) const;
    /// Header plus one summary row.
    std::string to_csv() const;
};

InstanceMetrics score_instance(const RunOutput& out, const RunReference& ref,
                               const DecisionCues& cues = DecisionCues::builtin());

/// Means over instances, matched by id. Structure similarity needs reference
/// labels and decision correctness needs a reference decision; instances
/// without them are left out of those two means only. Throws
/// Error{"misaligned"} when the id sets differ or repeat.
EvalReport evaluate_run(std::span<const RunOutput> outputs, std::span<const RunReference> references,
                        const DecisionCues& cues = DecisionCues::builtin());

/// Reads output records: {id, text, labels?} or a generate record
/// {id, text, selected: [{label, ...}]}.
std::vector<RunOutput> read_outputs(const std::filesystem::path& path);
/// Reads reference records {id, text, labels?, decision?}, a generate record,
/// or corpus submissions (meta-review text, labels and decision).
std::vector<RunReference> read_references(const std::filesystem::path& path);

}  // namespace mred::metrics
