#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/combine.hpp"
#include "mred/control.hpp"
#include "mred/corpus.hpp"
#include "mred/extract.hpp"
#include "mred/generics.hpp"
#include "mred/metrics.hpp"
#include "mred/tagger.hpp"

namespace mred::pipeline {

/// FNV-1a of the compact JSON dump (object keys are sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Extractable units of a combined input with one label each. Review
/// sentences take external labels or tagger predictions; the synthesized
/// rating sentence is labeled rating_summary.
struct SourceDoc {
    combine::CombinedInput combined;
    std::vector<combine::SourceSentence> units;
    std::vector<Category> labels;  ///< empty when no tagger and no labels were given

    std::vector<std::string> texts() const;
};

SourceDoc prepare_source(const std::string& submission_id, std::span<const corpus::Review> reviews,
                         combine::Strategy strategy, const combine::SimilarityProvider& provider,
                         const tagger::TaggerModel* model, const tagger::LabelMap* labels);

struct GenerateOptions {
    extract::Engine engine = extract::Engine::textrank;
    control::Mode mode = control::Mode::sent_ctrl;
    combine::Strategy strategy = combine::Strategy::concat;
    extract::EngineConfig engine_config;

    nlohmann::json to_json() const;
};

struct SelectedSentence {
    std::optional<std::size_t> index;  ///< position among the source units
    std::string text;
    std::optional<Category> label;
    bool fallback = false;
    /// Controlled slots: the label the control asked for.
    std::optional<Category> requested;
    std::optional<std::size_t> review_index;
    std::optional<std::size_t> paragraph_index;
    std::optional<std::size_t> sentence_index;
};

/// One generation: the handoff record of the generate and generic commands.
struct GenerateRecord {
    std::string id;
    std::optional<std::vector<Category>> control;
    std::vector<SelectedSentence> selected;
    std::string text;
    std::vector<std::string> warnings;

    std::vector<Category> labels() const;
    /// (chosen labels, requested labels) over the non-fallback controlled slots.
    std::pair<std::vector<Category>, std::vector<Category>> without_fallbacks() const;
    nlohmann::json to_json() const;
    static GenerateRecord from_json(const nlohmann::json& j);
};

/// Extraction over arbitrary reviews. Exactly one of control and k.
GenerateRecord extract_reviews(const std::string& id, std::span<const corpus::Review> reviews,
                               const std::optional<std::vector<Category>>& control, std::optional<std::size_t> k,
                               const GenerateOptions& options, const combine::SimilarityProvider& provider,
                               const tagger::TaggerModel* model, const tagger::LabelMap* labels = nullptr);

/// Corpus instance: k and the sent-ctrl sequence come from the gold
/// meta-review, so unctrl and sent-ctrl runs select the same number of
/// sentences. seg-ctrl is not an extractive mode.
GenerateRecord generate(const corpus::Submission& s, const GenerateOptions& options,
                        const combine::SimilarityProvider& provider, const tagger::TaggerModel* model,
                        const tagger::LabelMap* labels = nullptr);

std::vector<GenerateRecord> generate_all(std::span<const corpus::Submission* const> subs,
                                         const GenerateOptions& options, const combine::SimilarityProvider& provider,
                                         const tagger::TaggerModel* model, const tagger::LabelMap* labels = nullptr,
                                         std::size_t threads = 0);

/// Generic baseline for one instance, following its sent-ctrl sequence.
GenerateRecord generic_record(const corpus::Submission& s, const generics::GenericBank& bank);

metrics::RunOutput to_output(const GenerateRecord& r);
metrics::RunReference to_reference(const corpus::Submission& s);

metrics::EvalReport evaluate_records(std::span<const GenerateRecord> records,
                                     std::span<const corpus::Submission* const> subs);

}  // namespace mred::pipeline
