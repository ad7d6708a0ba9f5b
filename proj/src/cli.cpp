#include "mred/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "mred/analytics.hpp"
#include "mred/attnmap.hpp"
#include "mred/combine.hpp"
#include "mred/control.hpp"
#include "mred/corpus.hpp"
#include "mred/error.hpp"
#include "mred/generics.hpp"
#include "mred/harvest.hpp"
#include "mred/metrics.hpp"
#include "mred/pipeline.hpp"
#include "mred/service.hpp"
#include "mred/tagger.hpp"
#include "mred/text.hpp"

namespace mred::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error("malformed_record", path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes `content` to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot write " + path);
    f << content;
    if (!f) throw Error("io_error", "write failed for " + path);
}

std::string jsonl(const std::vector<json>& rows) {
    std::string s;
    for (const auto& r : rows) s += r.dump() + "\n";
    return s;
}

std::vector<const corpus::Submission*> pick(const corpus::Corpus& c, const std::string& split) {
    if (split == "all") {
        std::vector<const corpus::Submission*> all;
        for (const auto& s : c.submissions) all.push_back(&s);
        return all;
    }
    return c.split(corpus::parse_split(split));
}

std::vector<corpus::Submission> copy_of(const std::vector<const corpus::Submission*>& subs) {
    std::vector<corpus::Submission> out;
    out.reserve(subs.size());
    for (const auto* s : subs) out.push_back(*s);
    return out;
}

std::string default_corpus() { return (corpus::default_data_dir() / "mred.jsonl").string(); }

const std::vector<std::string> kStatKinds = {"categories", "transition", "length-score",
                                             "length-category", "borderline", "occurrence"};

struct Options {
    // shared
    std::string corpus_path, out_path, split = "all", labels_path, model_path;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    // harvest
    std::vector<int> years;
    std::string harvest_config, base_url, out_dir = ".";
    // ingest
    std::string input_path, format = "corpus", annotations_path;
    bool do_split = false;
    std::size_t min_words = 20, max_words = 400;
    // stats
    std::string stat_kind, stat_format = "json";
    // tag
    std::size_t epochs = 200;
    // combine / generate
    std::string strategy = "concat", mode = "sent-ctrl", vectors_path, engine = "textrank", engine_config_path;
    std::size_t truncate = 0;
    // generic
    std::string side = "target", filter = "all", bank_path, subset = "all";
    std::size_t max_group = 3000;
    // evaluate
    std::string outputs_path, references_path, report = "json", cues_path;
    bool instances = false;
    // attn
    std::string tensor_path, boundaries_path, svg_path;
    std::size_t top_k = 3;
    // serve
    std::string bind, data_dir, static_dir;
};

std::unique_ptr<combine::SimilarityProvider> provider_for(const std::string& vectors) {
    if (vectors.empty()) return std::make_unique<combine::TfidfSimilarity>();
    return std::make_unique<combine::ExternalVectorSimilarity>(combine::ExternalVectorSimilarity::load(vectors));
}

std::optional<tagger::TaggerModel> maybe_model(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return tagger::TaggerModel::load(path);
}

std::optional<tagger::LabelMap> maybe_labels(const std::string& path, const corpus::Corpus* c, std::ostream& err) {
    if (path.empty()) return std::nullopt;
    tagger::Coverage cov;
    auto m = tagger::load_labels(path, c, c ? &cov : nullptr);
    if (c && cov.fraction() < 1.0)
        err << "warning: labels cover " << cov.labeled << " of " << cov.sentences
            << " review sentences; the rest use the tagger\n";
    return m;
}

// --- commands ---

int cmd_harvest(const Options& o, std::ostream& out, std::ostream& err) {
    auto cfg = o.harvest_config.empty() ? harvest::Config::defaults() : harvest::Config::load(o.harvest_config);
    if (!o.base_url.empty()) cfg.base_url = o.base_url;
    fs::create_directories(o.out_dir);
    json summary = json::object();
    for (int year : o.years) {
        auto res = harvest::harvest(cfg, year);
        const std::string y = std::to_string(year);
        emit((fs::path(o.out_dir) / ("raw_" + y + ".jsonl")).string(), jsonl(res.raw), out);
        std::vector<json> norm;
        for (const auto& h : res.submissions) norm.push_back(h.to_json());
        emit((fs::path(o.out_dir) / ("harvested_" + y + ".jsonl")).string(), jsonl(norm), out);
        for (const auto& w : res.warnings) err << "warning: " << w << "\n";
        summary[y] = {{"submissions", res.counts.submissions},
                      {"with_reviews", res.counts.with_reviews},
                      {"with_meta_review", res.counts.with_meta_review},
                      {"dropped_without_meta_review", res.counts.dropped_without_meta_review},
                      {"schema_skipped", res.counts.schema_skipped}};
    }
    out << summary.dump() << "\n";
    return 0;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
    corpus::Corpus c;
    if (o.format == "corpus") {
        c = corpus::load_corpus(o.input_path);
    } else {
        std::map<std::string, std::vector<corpus::LabeledSentence>> notes;
        if (!o.annotations_path.empty()) {
            for (const auto& j : read_jsonl(o.annotations_path)) {
                std::vector<corpus::LabeledSentence> ls;
                try {
                    for (const auto& s : j.at("meta_review"))
                        ls.push_back({s.at("text").get<std::string>(), parse_category(s.at("label").get<std::string>())});
                    notes[j.at("id").get<std::string>()] = std::move(ls);
                } catch (const json::exception& e) {
                    throw Error("malformed_record", o.annotations_path + ": " + e.what());
                }
            }
        }
        const auto model = maybe_model(o.model_path);
        if (notes.empty() && !model) throw Error("precondition", "harvested input needs --annotations or --model");
        harvest::Labeler labeler = [&](const harvest::HarvestedSubmission& h) {
            if (auto it = notes.find(h.id); it != notes.end()) return it->second;
            std::vector<corpus::LabeledSentence> ls;
            if (!model) return ls;
            const auto sents = corpus::segment_sentences(h.meta_review_text);
            for (const auto& t : tagger::predict(*model, sents, h.decision)) ls.push_back({t.text, t.label});
            return ls;
        };
        std::size_t dropped = 0;
        for (const auto& j : read_jsonl(o.input_path)) {
            if (auto s = harvest::to_submission(harvest::HarvestedSubmission::from_json(j), labeler))
                c.submissions.push_back(std::move(*s));
            else
                ++dropped;
        }
        c.provenance.source = o.input_path;
        if (dropped) err << "warning: dropped " << dropped << " harvested records without a usable meta-review\n";
    }

    json report = {{"submissions", c.submissions.size()},
                   {"reviews", c.review_count()},
                   {"sentences", c.sentence_count()}};
    if (o.do_split) {
        corpus::SplitOptions so;
        so.min_words = o.min_words;
        so.max_words = o.max_words;
        so.seed = o.seed;
        corpus::SplitReport sr;
        c = corpus::filter_and_split(c, so, &sr);
        report["kept"] = sr.kept;
        report["train"] = sr.train;
        report["validation"] = sr.validation;
        report["test"] = sr.test;
    }
    if (!o.out_path.empty()) corpus::save_corpus(o.out_path, c);
    (o.out_path.empty() ? err : out) << report.dump() << "\n";
    if (o.out_path.empty()) {
        std::ostringstream os;
        corpus::write_corpus(os, c);
        out << os.str();
    }
    return 0;
}

int cmd_stats(const Options& o, std::ostream& out) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto subs = copy_of(pick(c, o.split));
    auto render = [&](const auto& report) {
        if (o.stat_format == "csv") return report.to_csv();
        if (o.stat_format == "svg") return report.to_svg();
        return report.to_json().dump(2) + "\n";
    };
    std::string body;
    if (o.stat_kind == "transition") body = render(analytics::transition_matrix(subs));
    else if (o.stat_kind == "categories") body = render(analytics::category_distribution(subs));
    else if (o.stat_kind == "length-score") body = render(analytics::length_rating_breakdown(subs));
    else if (o.stat_kind == "length-category") body = render(analytics::length_category_breakdown(subs));
    else if (o.stat_kind == "borderline") body = render(analytics::borderline_breakdown(subs));
    else body = render(analytics::occurrence_by_score(subs));
    emit(o.out_path, body, out);
    return 0;
}

int cmd_tag_train(const Options& o, std::ostream& out, std::ostream& err) {
    const auto c = corpus::load_corpus(o.corpus_path);
    tagger::TrainOptions to;
    to.max_epochs = o.epochs;
    to.seed = o.seed;
    const auto model = tagger::train(pick(c, o.split), to);
    for (const auto& w : model.warnings) err << "warning: " << w << "\n";
    emit(o.model_path, model.to_json().dump() + "\n", out);
    return 0;
}

int cmd_tag_predict(const Options& o, std::ostream& out, std::ostream& err) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto model = maybe_model(o.model_path);
    const auto labels = maybe_labels(o.labels_path, &c, err);
    if (!model && !labels) throw Error("precondition", "tag predict needs --model or --labels");
    std::vector<json> rows;
    for (const auto* s : pick(c, o.split)) {
        const auto tagged = tagger::tag_reviews(*s, model ? &*model : nullptr, labels ? &*labels : nullptr);
        for (std::size_t r = 0; r < tagged.size(); ++r)
            for (std::size_t i = 0; i < tagged[r].size(); ++i)
                rows.push_back({{"submission_id", s->id},
                                {"review_id", s->reviews[r].reviewer_id},
                                {"sentence_index", i},
                                {"label", storage_name(tagged[r][i].label)},
                                {"confidence", tagged[r][i].confidence}});
    }
    emit(o.out_path, jsonl(rows), out);
    return 0;
}

int cmd_tag_eval(const Options& o, std::ostream& out) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto model = tagger::TaggerModel::load(o.model_path);
    auto res = tagger::evaluate(model, pick(c, o.split)).to_json();
    res["split"] = o.split;
    emit(o.out_path, res.dump(2) + "\n", out);
    return 0;
}

int cmd_combine(const Options& o, std::ostream& out) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto provider = provider_for(o.vectors_path);
    const auto strategy = combine::parse_strategy(o.strategy);
    const auto mode = control::parse_mode(o.mode);
    std::optional<std::size_t> limit;
    if (o.truncate > 0) limit = o.truncate;
    std::vector<json> rows;
    for (const auto* s : pick(c, o.split))
        rows.push_back(control::encode_submission(*s, strategy, mode, *provider, limit).to_json());
    emit(o.out_path, jsonl(rows), out);
    return 0;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto c = corpus::load_corpus(o.corpus_path);
    pipeline::GenerateOptions go;
    go.engine = extract::parse_engine(o.engine);
    go.mode = control::parse_mode(o.mode);
    go.strategy = combine::parse_strategy(o.strategy);
    if (!o.engine_config_path.empty()) go.engine_config = extract::EngineConfig::from_json(json::parse(read_file(o.engine_config_path)));
    const auto provider = provider_for(o.vectors_path);
    const auto model = maybe_model(o.model_path);
    const auto labels = maybe_labels(o.labels_path, &c, err);
    const auto subs = pick(c, o.split);
    const auto recs = pipeline::generate_all(subs, go, *provider, model ? &*model : nullptr,
                                             labels ? &*labels : nullptr, o.threads);
    std::vector<json> rows;
    std::size_t fallbacks = 0;
    for (const auto& r : recs) {
        rows.push_back(r.to_json());
        for (const auto& s : r.selected) fallbacks += s.fallback;
    }
    emit(o.out_path, jsonl(rows), out);
    json cfg = go.to_json();
    cfg["split"] = o.split;
    err << json{{"instances", recs.size()}, {"fallback_slots", fallbacks}, {"config_hash", pipeline::config_hash(cfg)}}.dump()
        << "\n";
    return 0;
}

int cmd_generic_build(const Options& o, std::ostream& out, std::ostream& err) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto model = maybe_model(o.model_path);
    const auto labels = maybe_labels(o.labels_path, &c, err);
    generics::BankOptions bo;
    bo.max_group = o.max_group;
    bo.seed = o.seed;
    if (o.threads) bo.threads = o.threads;
    const auto bank = generics::build_generic_bank(pick(c, o.split), generics::parse_side(o.side),
                                                   generics::parse_filter(o.filter), model ? &*model : nullptr,
                                                   labels ? &*labels : nullptr, bo);
    for (const auto& w : bank.warnings) err << "warning: " << w << "\n";
    emit(o.out_path, bank.to_json().dump() + "\n", out);
    return 0;
}

int cmd_generic_assemble(const Options& o, std::ostream& out, std::ostream& err) {
    const auto c = corpus::load_corpus(o.corpus_path);
    const auto bank = generics::GenericBank::load(o.bank_path);
    const auto subset = generics::parse_filter(o.subset);
    std::vector<json> rows;
    std::size_t skipped = 0;
    for (const auto* s : pick(c, o.split)) {
        if (!generics::passes(*s, subset)) {
            ++skipped;
            continue;
        }
        rows.push_back(pipeline::generic_record(*s, bank).to_json());
    }
    emit(o.out_path, jsonl(rows), out);
    err << json{{"instances", rows.size()}, {"filtered_out", skipped}}.dump() << "\n";
    return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    const auto cues = o.cues_path.empty() ? metrics::DecisionCues::builtin() : metrics::DecisionCues::load(o.cues_path);
    const auto outs = metrics::read_outputs(o.outputs_path);
    std::vector<metrics::RunReference> refs;
    if (o.split == "all") {
        refs = metrics::read_references(o.references_path);
    } else {
        // Corpus references restricted to one split.
        const auto c = corpus::load_corpus(o.references_path);
        for (const auto* s : pick(c, o.split)) refs.push_back(pipeline::to_reference(*s));
    }
    const auto rep = metrics::evaluate_run(outs, refs, cues);
    const std::string hash = pipeline::config_hash({{"outputs", text::hex64(text::fnv1a(read_file(o.outputs_path)))},
                                                    {"references", text::hex64(text::fnv1a(read_file(o.references_path)))},
                                                    {"split", o.split},
                                                    {"cue_version", cues.version}});
    std::string body;
    if (o.report == "csv") {
        const auto csv = rep.to_csv();
        const auto nl = csv.find('\n');
        body = csv.substr(0, nl) + ",config_hash\n" + csv.substr(nl + 1, csv.size() - nl - 2) + "," + hash + "\n";
    } else {
        auto j = rep.to_json(o.instances);
        j["config_hash"] = hash;
        body = j.dump(2) + "\n";
    }
    emit(o.out_path, body, out);
    return 0;
}

int cmd_attn(const Options& o, std::ostream& out) {
    const auto t = attn::load_tensor(o.tensor_path);
    json b;
    try {
        b = json::parse(read_file(o.boundaries_path));
    } catch (const json::parse_error& e) {
        throw Error("bad_boundaries", e.what());
    }
    if (!b.contains("source") || !b.contains("target"))
        throw Error("bad_boundaries", "boundaries file needs 'source' and 'target' range lists");
    std::optional<attn::Range> ctrl;
    if (auto it = b.find("control"); it != b.end() && !it->is_null()) {
        if (it->size() != 2) throw Error("bad_boundaries", "'control' must be [begin, end]");
        ctrl = attn::Range{(*it)[0].get<std::size_t>(), (*it)[1].get<std::size_t>()};
    }
    const auto src = attn::boundaries_from_json(b["source"]);
    const auto tgt = attn::boundaries_from_json(b["target"]);
    const auto res = attn::analyze(t, src, tgt, ctrl, o.top_k);
    emit(o.out_path, res.dump(2) + "\n", out);
    if (!o.svg_path.empty()) emit(o.svg_path, attn::matrix_svg(attn::aggregate(t, src, tgt)), out);
    return 0;
}

int cmd_serve(const Options& o, std::ostream& err) {
    const fs::path data = o.data_dir.empty() ? corpus::default_data_dir() : fs::path(o.data_dir);
    auto resolve = [&](const std::string& given, const char* fallback) -> fs::path {
        if (!given.empty()) return given;
        const fs::path p = data / fallback;
        if (fs::exists(p)) return p;
        err << "warning: " << p.string() << " not found; related endpoints answer 503\n";
        return {};
    };
    auto state = service::load_state(resolve(o.corpus_path, "mred.jsonl"), resolve(o.model_path, "tagger.json"));
    if (!o.static_dir.empty()) state.static_dir = o.static_dir;
    const service::Api api(std::move(state));
    const std::string bind = o.bind.empty() ? env_or("MRED_BIND", "127.0.0.1:8080") : o.bind;
    err << "serving on " << bind << " (config " << api.base_hash() << ")\n";
    service::serve(api, bind);
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    // Subcommands share Options fields, so defaults are applied after parsing
    // and only for options of the subcommand that actually ran.
    std::vector<std::tuple<const CLI::App*, const CLI::Option*, std::string*, std::string>> defaults;
    auto defaulted = [&defaults](const CLI::App* sub, CLI::Option* opt, std::string& field, std::string value) {
        opt->default_str(value);
        defaults.emplace_back(sub, opt, &field, std::move(value));
    };
    CLI::App app{"Meta-review corpus, extraction and evaluation toolkit", args.empty() ? "mred" : args[0]};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto* harvest = app.add_subcommand("harvest", "Fetch submissions with reviews and meta-reviews");
    harvest->add_option("--year", o.years, "Venue year(s)")->required();
    harvest->add_option("--config", o.harvest_config, "Harvest config JSON");
    harvest->add_option("--base-url", o.base_url, "API base URL");
    harvest->add_option("--out-dir", o.out_dir, "Directory for raw and normalized records");

    auto* ingest = app.add_subcommand("ingest", "Build, validate, filter and split a corpus file");
    ingest->add_option("--input", o.input_path, "Corpus or harvested JSON lines")->required();
    ingest->add_option("--format", o.format, "corpus or harvested")->check(CLI::IsMember({"corpus", "harvested"}));
    ingest->add_option("--annotations", o.annotations_path, "Labeled meta-reviews {id, meta_review}");
    ingest->add_option("--model", o.model_path, "Tagger used for unannotated meta-reviews");
    ingest->add_flag("--split", o.do_split, "Apply the length filter and the 8:1:1 split");
    ingest->add_option("--seed", o.seed, "Split seed");
    ingest->add_option("--min-words", o.min_words);
    ingest->add_option("--max-words", o.max_words);
    ingest->add_option("--out", o.out_path, "Output corpus path");

    auto* stats = app.add_subcommand("stats", "Corpus analytics");
    stats->add_option("kind", o.stat_kind, "Report")->required()->check(CLI::IsMember(kStatKinds));
    defaulted(stats, stats->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    stats->add_option("--split", o.split);
    stats->add_option("--out", o.stat_format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    stats->add_option("--output", o.out_path, "File to write (default stdout)");

    auto* tag = app.add_subcommand("tag", "Sentence intent tagger");
    tag->require_subcommand(1);
    auto* tag_train = tag->add_subcommand("train", "Fit on gold meta-review sentences");
    defaulted(tag_train, tag_train->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    defaulted(tag_train, tag_train->add_option("--split", o.split), o.split, "train");
    tag_train->add_option("--model", o.model_path, "Where to write the model")->required();
    tag_train->add_option("--epochs", o.epochs);
    tag_train->add_option("--seed", o.seed);
    auto* tag_predict = tag->add_subcommand("predict", "Label review sentences");
    defaulted(tag_predict, tag_predict->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    tag_predict->add_option("--split", o.split);
    tag_predict->add_option("--model", o.model_path);
    tag_predict->add_option("--labels", o.labels_path, "External labels that take precedence");
    tag_predict->add_option("--out", o.out_path);
    auto* tag_eval = tag->add_subcommand("eval", "Score against gold meta-review labels");
    defaulted(tag_eval, tag_eval->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    defaulted(tag_eval, tag_eval->add_option("--split", o.split), o.split, "test");
    tag_eval->add_option("--model", o.model_path)->required();
    tag_eval->add_option("--out", o.out_path);

    auto* comb = app.add_subcommand("combine", "Write encoded inputs for an external trainer");
    comb->add_option("--strategy", o.strategy);
    defaulted(comb, comb->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    comb->add_option("--split", o.split);
    comb->add_option("--control", o.mode, "unctrl, sent-ctrl or seg-ctrl");
    comb->add_option("--truncate", o.truncate, "Token limit including the prefix");
    comb->add_option("--vectors", o.vectors_path, "Paragraph vectors for merge");
    comb->add_option("--out", o.out_path);

    auto* gen = app.add_subcommand("generate", "Extractive generation");
    gen->add_option("--engine", o.engine)->check(CLI::IsMember({"lexrank", "textrank", "mmr"}));
    gen->add_option("--mode", o.mode);
    gen->add_option("--combine", o.strategy);
    defaulted(gen, gen->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    defaulted(gen, gen->add_option("--split", o.split), o.split, "test");
    gen->add_option("--model", o.model_path, "Tagger for review sentence labels");
    gen->add_option("--labels", o.labels_path, "External review sentence labels");
    gen->add_option("--vectors", o.vectors_path);
    gen->add_option("--config", o.engine_config_path, "Engine config JSON");
    gen->add_option("--threads", o.threads);
    gen->add_option("--out", o.out_path);

    auto* generic = app.add_subcommand("generic", "Generic-sentence baselines");
    generic->require_subcommand(1);
    auto* gbuild = generic->add_subcommand("build", "Rank generic sentences per category");
    defaulted(gbuild, gbuild->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    defaulted(gbuild, gbuild->add_option("--split", o.split), o.split, "train");
    gbuild->add_option("--side", o.side)->check(CLI::IsMember({"target", "source"}));
    gbuild->add_option("--filter", o.filter)->check(CLI::IsMember({"all", "high", "low"}));
    gbuild->add_option("--model", o.model_path);
    gbuild->add_option("--labels", o.labels_path);
    gbuild->add_option("--max-group", o.max_group);
    gbuild->add_option("--seed", o.seed);
    gbuild->add_option("--threads", o.threads);
    gbuild->add_option("--out", o.out_path);
    auto* gasm = generic->add_subcommand("assemble", "Fill each test control sequence from a bank");
    gasm->add_option("--bank", o.bank_path)->required();
    defaulted(gasm, gasm->add_option("--corpus", o.corpus_path), o.corpus_path, default_corpus());
    defaulted(gasm, gasm->add_option("--split", o.split), o.split, "test");
    gasm->add_option("--subset", o.subset, "Restrict instances by average rating")
        ->check(CLI::IsMember({"all", "high", "low"}));
    gasm->add_option("--out", o.out_path);

    auto* eval = app.add_subcommand("evaluate", "ROUGE, structure similarity and decision correctness");
    eval->add_option("--outputs", o.outputs_path)->required();
    eval->add_option("--references", o.references_path)->required();
    eval->add_option("--split", o.split, "With a corpus file as references, score only this split");
    eval->add_option("--report", o.report)->check(CLI::IsMember({"json", "csv"}));
    eval->add_flag("--instances", o.instances, "Include per-instance scores (json)");
    eval->add_option("--cues", o.cues_path, "Decision cue lexicon");
    eval->add_option("--out", o.out_path);

    auto* attn = app.add_subcommand("attn", "Sentence-level attention attribution");
    attn->add_option("--tensor", o.tensor_path)->required();
    attn->add_option("--boundaries", o.boundaries_path, "JSON {source, target, control?}")->required();
    attn->add_option("--k", o.top_k);
    attn->add_option("--svg", o.svg_path);
    attn->add_option("--out", o.out_path);

    auto* serve = app.add_subcommand("serve", "HTTP API");
    serve->add_option("--bind", o.bind, "host:port (env MRED_BIND)");
    serve->add_option("--data-dir", o.data_dir, "Data root (env MRED_DATA_DIR)");
    serve->add_option("--corpus", o.corpus_path);
    serve->add_option("--model", o.model_path);
    serve->add_option("--static", o.static_dir, "Directory served at /");

    std::vector<std::string> owned = args.empty() ? std::vector<std::string>{"mred"} : args;
    std::vector<char*> argv;
    for (auto& a : owned) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n";
        const CLI::App* shown = &app;
        for (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
             sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
            shown = sub;
        err << shown->help();
        return kUsageExit;
    }

    for (auto& [sub, opt, field, value] : defaults)
        if (sub->parsed() && opt->count() == 0) *field = value;

    try {
        if (*harvest) return cmd_harvest(o, out, err);
        if (*ingest) return cmd_ingest(o, out, err);
        if (*stats) return cmd_stats(o, out);
        if (*tag_train) return cmd_tag_train(o, out, err);
        if (*tag_predict) return cmd_tag_predict(o, out, err);
        if (*tag_eval) return cmd_tag_eval(o, out);
        if (*comb) return cmd_combine(o, out);
        if (*gen) return cmd_generate(o, out, err);
        if (*gbuild) return cmd_generic_build(o, out, err);
        if (*gasm) return cmd_generic_assemble(o, out, err);
        if (*eval) return cmd_evaluate(o, out);
        if (*attn) return cmd_attn(o, out);
        if (*serve) return cmd_serve(o, err);
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << "\n";
        return kFailureExit;
    } catch (const json::exception& e) {
        err << "error: malformed_record: " << e.what() << "\n";
        return kFailureExit;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kFailureExit;
    }
    return kUsageExit;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace mred::cli
