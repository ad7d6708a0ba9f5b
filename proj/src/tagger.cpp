#include "mred/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mred/error.hpp"
#include "mred/random.hpp"
#include "mred/text.hpp"

namespace mred::tagger {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTieEpsilon = 1e-9;
constexpr std::size_t kC = kNumCategories;

bool is_rating_digit(std::string_view t) {
    if (t.empty() || t.size() > 2) return false;
    for (char c : t)
        if (c < '0' || c > '9') return false;
    const int v = std::stoi(std::string(t));
    return v >= 1 && v <= 10;
}

std::vector<std::string> bigrams_of(const std::vector<std::string>& toks) {
    std::vector<std::string> out;
    std::string prev = "<s>";
    for (const auto& t : toks) {
        out.push_back("b:" + prev + " " + t);
        prev = t;
    }
    return out;
}

struct Example {
    std::vector<std::uint32_t> features;
    std::size_t label;
};

std::array<double, kC> softmax(const std::array<double, kC>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::array<double, kC> p{};
    double z = 0;
    for (std::size_t c = 0; c < kC; ++c) z += (p[c] = std::exp(logits[c] - mx));
    for (auto& v : p) v /= z;
    return p;
}

std::array<double, kC> logits_of(const std::vector<double>& w, const std::vector<std::uint32_t>& feats) {
    std::array<double, kC> l{};
    for (auto f : feats) {
        const double* row = &w[static_cast<std::size_t>(f) * kC];
        for (std::size_t c = 0; c < kC; ++c) l[c] += row[c];
    }
    return l;
}

std::vector<std::uint32_t> lookup(const TaggerModel& m, const std::vector<std::string>& names) {
    std::vector<std::uint32_t> out;
    for (const auto& n : names)
        if (auto it = m.vocabulary.find(n); it != m.vocabulary.end()) out.push_back(it->second);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

std::vector<std::string> sentence_features(std::span<const std::string> sentences, std::size_t i) {
    const auto toks = text::rouge_tokens(sentences[i]);
    std::vector<std::string> out;
    out.reserve(toks.size() * 2 + 5);
    out.emplace_back("bias");
    bool digit = false;
    for (const auto& t : toks) {
        out.push_back("u:" + t);
        digit = digit || is_rating_digit(t);
    }
    for (auto& b : bigrams_of(toks)) out.push_back(std::move(b));
    const std::size_t n = sentences.size();
    if (i == 0) out.emplace_back("pos:first");
    if (i + 1 == n) out.emplace_back("pos:last");
    out.push_back("pos:q" + std::to_string(4 * i / n));
    if (digit) out.emplace_back("has:rating_digit");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::array<double, kNumCategories> TaggerModel::emission_probs(std::span<const std::string> sentences,
                                                               std::size_t i) const {
    return softmax(logits_of(emission_weights, lookup(*this, sentence_features(sentences, i))));
}

TaggerModel train(std::span<const corpus::Submission* const> split, const TrainOptions& options) {
    std::vector<std::vector<std::string>> docs;
    std::vector<std::vector<Category>> gold;
    for (const auto* s : split) {
        if (s->meta_review.sentences.empty()) continue;
        docs.emplace_back();
        for (const auto& ls : s->meta_review.sentences) docs.back().push_back(ls.text);
        gold.push_back(s->meta_review.labels());
    }
    if (docs.empty()) throw Error("empty_split", "training split has no labeled meta-review sentences");

    // Feature inventory: every non-bigram feature, plus bigrams seen often enough.
    std::vector<std::vector<std::string>> feats;
    std::unordered_map<std::string, std::size_t> bigram_count;
    for (const auto& d : docs)
        for (std::size_t i = 0; i < d.size(); ++i) {
            feats.push_back(sentence_features(d, i));
            for (const auto& f : feats.back())
                if (f.starts_with("b:")) ++bigram_count[f];
        }
    std::set<std::string> names;
    for (const auto& fs : feats)
        for (const auto& f : fs)
            if (!f.starts_with("b:") || bigram_count[f] >= options.bigram_min_count) names.insert(f);

    TaggerModel m;
    m.bigram_min_count = options.bigram_min_count;
    std::uint32_t next = 0;
    for (const auto& n : names) m.vocabulary.emplace(n, next++);
    m.emission_weights.assign(names.size() * kC, 0.0);

    std::vector<Example> examples;
    std::array<std::size_t, kC> label_count{};
    {
        std::size_t k = 0;
        for (std::size_t d = 0; d < docs.size(); ++d)
            for (std::size_t i = 0; i < docs[d].size(); ++i, ++k) {
                examples.push_back({lookup(m, feats[k]), index_of(gold[d][i])});
                ++label_count[index_of(gold[d][i])];
            }
    }

    const double total = static_cast<double>(examples.size());
    for (std::size_t c = 0; c < kC; ++c) {
        m.log_priors[c] = std::log((static_cast<double>(label_count[c]) + 1.0) / (total + kC));
        if (label_count[c] == 0)
            m.warnings.push_back("label '" + std::string(storage_name(kAllCategories[c])) +
                                 "' absent from training; using the smoothed prior");
    }

    // Sentence-level transitions, add-one over the reachable destinations.
    std::array<std::array<double, kStates>, kStates> tc{};
    for (const auto& g : gold) {
        std::size_t prev = kStart;
        for (Category c : g) {
            tc[prev][state_of(c)] += 1;
            prev = state_of(c);
        }
        tc[prev][kEnd] += 1;
    }
    for (std::size_t from = 0; from < kStates; ++from) {
        for (auto& v : m.transition_log_probs[from]) v = kNegInf;
        if (from == kEnd) continue;
        double row = 0;
        for (std::size_t to = 1; to < kStates; ++to) row += tc[from][to] + 1.0;
        for (std::size_t to = 1; to < kStates; ++to) m.transition_log_probs[from][to] = std::log((tc[from][to] + 1.0) / row);
    }

    // Mini-batch AdaGrad on the L2-penalized mean log-likelihood.
    auto& w = m.emission_weights;
    std::vector<double> g2(w.size(), 0.0);
    std::vector<double> grad(w.size(), 0.0);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(options.seed);

    auto objective = [&] {
        double ll = 0;
        for (const auto& ex : examples) ll += std::log(std::max(softmax(logits_of(w, ex.features))[ex.label], 1e-300));
        double reg = 0;
        for (double v : w) reg += v * v;
        return ll / total - 0.5 * options.l2 * reg;
    };

    double prev_obj = objective();
    const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
    std::vector<std::uint32_t> touched;
    for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
        portable_shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            touched.clear();
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = examples[order[k]];
                const auto p = softmax(logits_of(w, ex.features));
                for (auto f : ex.features) {
                    double* row = &grad[static_cast<std::size_t>(f) * kC];
                    for (std::size_t c = 0; c < kC; ++c) row[c] += (c == ex.label ? 1.0 : 0.0) - p[c];
                    touched.push_back(f);
                }
            }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto f : touched) {
                for (std::size_t c = 0; c < kC; ++c) {
                    const std::size_t idx = static_cast<std::size_t>(f) * kC + c;
                    const double gval = grad[idx] * scale - options.l2 * w[idx];
                    grad[idx] = 0;
                    g2[idx] += gval * gval;
                    w[idx] += options.learning_rate * gval / (std::sqrt(g2[idx]) + 1e-8);
                }
            }
        }
        m.epochs = epoch + 1;
        const double obj = objective();
        const bool done = std::abs(obj - prev_obj) < options.tolerance;
        prev_obj = obj;
        if (done) break;
    }
    m.final_log_likelihood = prev_obj;
    if (m.epochs == options.max_epochs)
        m.warnings.push_back("stopped at the epoch limit (" + std::to_string(options.max_epochs) + ")");
    return m;
}

TaggerModel train(std::span<const corpus::Submission> split, const TrainOptions& options) {
    std::vector<const corpus::Submission*> ptrs;
    for (const auto& s : split) ptrs.push_back(&s);
    return train(std::span<const corpus::Submission* const>(ptrs), options);
}

TaggedReview predict(const TaggerModel& model, std::span<const std::string> sentences,
                     std::optional<Decision> decision) {
    const std::size_t n = sentences.size();
    TaggedReview out;
    if (n == 0) return out;

    std::vector<std::array<double, kC>> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = model.emission_probs(sentences, i);

    auto better = [&](double a, std::size_t ca, double b, std::size_t cb) {
        if (a > b + kTieEpsilon) return true;
        if (b > a + kTieEpsilon) return false;
        return priority_rank(kAllCategories[ca], decision) < priority_rank(kAllCategories[cb], decision);
    };
    auto emit = [&](std::size_t i, std::size_t c) {
        return std::log(std::max(probs[i][c], 1e-300)) - model.log_priors[c];
    };

    std::vector<std::array<double, kC>> delta(n);
    std::vector<std::array<std::size_t, kC>> back(n);
    for (std::size_t c = 0; c < kC; ++c) delta[0][c] = model.transition_log_probs[kStart][c + 1] + emit(0, c);
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t c = 0; c < kC; ++c) {
            std::size_t best = 0;
            double best_score = delta[i - 1][0] + model.transition_log_probs[1][c + 1];
            for (std::size_t p = 1; p < kC; ++p) {
                const double s = delta[i - 1][p] + model.transition_log_probs[p + 1][c + 1];
                if (better(s, p, best_score, best)) {
                    best = p;
                    best_score = s;
                }
            }
            delta[i][c] = best_score + emit(i, c);
            back[i][c] = best;
        }

    std::size_t last = 0;
    double last_score = delta[n - 1][0] + model.transition_log_probs[1][kEnd];
    for (std::size_t c = 1; c < kC; ++c) {
        const double s = delta[n - 1][c] + model.transition_log_probs[c + 1][kEnd];
        if (better(s, c, last_score, last)) {
            last = c;
            last_score = s;
        }
    }
    std::vector<std::size_t> path(n);
    path[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i][path[i]];

    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({sentences[i], kAllCategories[path[i]], probs[i][path[i]]});
    return out;
}

EvalResult score(std::span<const Category> gold, std::span<const Category> predicted) {
    if (gold.size() != predicted.size()) throw Error("precondition", "gold and predicted labels are not aligned");
    EvalResult r;
    r.n_sentences = gold.size();
    std::array<std::size_t, kC> tp{}, gc{}, pc{};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++gc[index_of(gold[i])];
        ++pc[index_of(predicted[i])];
        if (gold[i] == predicted[i]) {
            ++tp[index_of(gold[i])];
            ++correct;
        }
    }
    if (gold.empty()) return r;
    r.micro_f1 = static_cast<double>(correct) / static_cast<double>(gold.size());
    double macro = 0;
    std::size_t present = 0;
    std::size_t majority = 0;
    for (std::size_t c = 0; c < kC; ++c) {
        if (gc[c] > gc[majority]) majority = c;
        if (gc[c] == 0 && pc[c] == 0) continue;
        CategoryScore cs;
        cs.support = gc[c];
        cs.predicted = pc[c];
        cs.precision = pc[c] ? static_cast<double>(tp[c]) / static_cast<double>(pc[c]) : 0.0;
        cs.recall = gc[c] ? static_cast<double>(tp[c]) / static_cast<double>(gc[c]) : 0.0;
        cs.f1 = cs.precision + cs.recall > 0 ? 2 * cs.precision * cs.recall / (cs.precision + cs.recall) : 0.0;
        macro += cs.f1;
        ++present;
        r.per_category[kAllCategories[c]] = cs;
    }
    r.macro_f1 = macro / static_cast<double>(present);
    r.majority_label = kAllCategories[majority];
    r.majority_baseline = static_cast<double>(gc[majority]) / static_cast<double>(gold.size());
    return r;
}

EvalResult evaluate(const TaggerModel& model, std::span<const corpus::Submission* const> split) {
    std::vector<Category> gold, pred;
    for (const auto* s : split) {
        std::vector<std::string> texts;
        for (const auto& ls : s->meta_review.sentences) {
            texts.push_back(ls.text);
            gold.push_back(ls.label);
        }
        for (const auto& t : predict(model, texts)) pred.push_back(t.label);
    }
    return score(gold, pred);
}

nlohmann::json EvalResult::to_json() const {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [c, s] : per_category)
        per[std::string(storage_name(c))] = {{"precision", s.precision},
                                             {"recall", s.recall},
                                             {"f1", s.f1},
                                             {"support", s.support},
                                             {"predicted", s.predicted}};
    return {{"micro_f1", micro_f1},
            {"macro_f1", macro_f1},
            {"n_sentences", n_sentences},
            {"majority_label", storage_name(majority_label)},
            {"majority_baseline", majority_baseline},
            {"per_category", per}};
}

// --- serialization ---

nlohmann::json TaggerModel::to_json() const {
    std::vector<std::string> features(vocabulary.size());
    for (const auto& [name, id] : vocabulary) features[id] = name;
    auto weights = nlohmann::json::array();
    for (std::size_t f = 0; f < features.size(); ++f)
        weights.push_back(std::vector<double>(emission_weights.begin() + static_cast<std::ptrdiff_t>(f * kC),
                                              emission_weights.begin() + static_cast<std::ptrdiff_t>((f + 1) * kC)));
    auto trans = nlohmann::json::array();
    for (const auto& row : transition_log_probs) {
        auto r = nlohmann::json::array();
        for (double v : row) r.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
        trans.push_back(std::move(r));
    }
    auto cats = nlohmann::json::array();
    for (Category c : kAllCategories) cats.push_back(storage_name(c));
    return {{"format", "mred-tagger"},
            {"version", kFormatVersion},
            {"categories", cats},
            {"features", features},
            {"weights", weights},
            {"transition_log_probs", trans},
            {"log_priors", log_priors},
            {"bigram_min_count", bigram_min_count},
            {"epochs", epochs},
            {"final_log_likelihood", final_log_likelihood},
            {"warnings", warnings}};
}

TaggerModel TaggerModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "mred-tagger")
            throw Error("malformed_record", "not a tagger model file");
        if (j.at("version").get<int>() != kFormatVersion)
            throw Error("malformed_record", "unsupported tagger model version " + j.at("version").dump());
        const auto cats = j.at("categories").get<std::vector<std::string>>();
        if (cats.size() != kC) throw Error("malformed_record", "tagger model must list 9 categories");
        for (std::size_t c = 0; c < kC; ++c)
            if (parse_category(cats[c]) != kAllCategories[c])
                throw Error("malformed_record", "tagger model categories out of order");

        TaggerModel m;
        const auto features = j.at("features").get<std::vector<std::string>>();
        const auto& weights = j.at("weights");
        if (weights.size() != features.size()) throw Error("malformed_record", "features and weights differ in size");
        m.emission_weights.reserve(features.size() * kC);
        for (std::size_t f = 0; f < features.size(); ++f) {
            m.vocabulary.emplace(features[f], static_cast<std::uint32_t>(f));
            const auto row = weights[f].get<std::vector<double>>();
            if (row.size() != kC) throw Error("malformed_record", "weight row of wrong width");
            for (double v : row) {
                if (!std::isfinite(v)) throw Error("malformed_record", "non-finite weight");
                m.emission_weights.push_back(v);
            }
        }
        const auto& trans = j.at("transition_log_probs");
        if (trans.size() != kStates) throw Error("malformed_record", "transition matrix must be 11x11");
        for (std::size_t a = 0; a < kStates; ++a) {
            if (trans[a].size() != kStates) throw Error("malformed_record", "transition matrix must be 11x11");
            for (std::size_t b = 0; b < kStates; ++b)
                m.transition_log_probs[a][b] = trans[a][b].is_null() ? kNegInf : trans[a][b].get<double>();
        }
        m.log_priors = j.at("log_priors").get<std::array<double, kC>>();
        m.bigram_min_count = j.value("bigram_min_count", std::size_t{3});
        m.epochs = j.value("epochs", std::size_t{0});
        m.final_log_likelihood = j.value("final_log_likelihood", 0.0);
        m.warnings = j.value("warnings", std::vector<std::string>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed_record", std::string("tagger model: ") + e.what());
    }
}

void TaggerModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << to_json().dump() << '\n';
}

TaggerModel TaggerModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open tagger model " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("malformed_record", path.string() + ": " + e.what());
    }
}

// --- external labels ---

LabelMap load_labels(const std::filesystem::path& path, const corpus::Corpus* corpus, Coverage* coverage) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open label file " + path.string());
    LabelMap out;
    std::map<std::pair<std::string, std::string>, std::size_t> sentence_counts;
    if (corpus)
        for (const auto& s : corpus->submissions)
            for (const auto& r : s.reviews) sentence_counts[{s.id, r.reviewer_id}] = corpus::review_sentences(r).size();

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        nlohmann::json j;
        LabelKey key;
        std::string label;
        try {
            j = nlohmann::json::parse(line);
            key = {j.at("submission_id").get<std::string>(), j.at("review_id").get<std::string>(),
                   j.at("sentence_index").get<std::size_t>()};
            label = j.at("label").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed_record", where + e.what());
        }
        const auto cat = try_parse_category(label);
        if (!cat) throw Error("unknown_label", where + "unknown label '" + label + "'");
        if (corpus) {
            auto it = sentence_counts.find({std::get<0>(key), std::get<1>(key)});
            if (it == sentence_counts.end())
                throw Error("index_out_of_range", where + "no review '" + std::get<1>(key) + "' in submission '" +
                                                      std::get<0>(key) + "'");
            if (std::get<2>(key) >= it->second)
                throw Error("index_out_of_range", where + "sentence " + std::to_string(std::get<2>(key)) +
                                                      " beyond the review's " + std::to_string(it->second) +
                                                      " sentences");
        }
        out[key] = *cat;
    }
    if (coverage) {
        *coverage = {};
        for (const auto& [k, n] : sentence_counts) coverage->sentences += n;
        coverage->labeled = corpus ? out.size() : 0;
    }
    return out;
}

std::vector<TaggedReview> tag_reviews(const corpus::Submission& s, const TaggerModel* model,
                                      const LabelMap* external) {
    std::vector<TaggedReview> out;
    for (const auto& r : s.reviews) {
        const auto sents = corpus::review_sentences(r);
        std::vector<std::optional<Category>> ext(sents.size());
        bool complete = true;
        for (std::size_t i = 0; i < sents.size(); ++i) {
            if (external)
                if (auto it = external->find({s.id, r.reviewer_id, i}); it != external->end()) ext[i] = it->second;
            complete = complete && ext[i].has_value();
        }
        TaggedReview tr;
        if (complete) {
            for (std::size_t i = 0; i < sents.size(); ++i) tr.push_back({sents[i], *ext[i], 1.0});
        } else {
            if (!model)
                throw Error("precondition", "review '" + r.reviewer_id + "' of '" + s.id +
                                                "' has unlabeled sentences and no tagger model is loaded");
            tr = predict(*model, sents);
            for (std::size_t i = 0; i < sents.size(); ++i)
                if (ext[i]) tr[i] = {sents[i], *ext[i], 1.0};
        }
        out.push_back(std::move(tr));
    }
    return out;
}

}  // namespace mred::tagger
