#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mred/corpus.hpp"
#include "mred/random.hpp"

namespace mred::testing {

inline corpus::Review review(std::string id, std::string text, std::optional<int> rating = std::nullopt) {
    corpus::Review r;
    r.reviewer_id = std::move(id);
    r.text = std::move(text);
    r.rating = rating;
    return r;
}

inline corpus::Submission submission(std::string id, std::vector<corpus::LabeledSentence> meta, Decision d,
                                     std::vector<corpus::Review> reviews,
                                     corpus::Split split = corpus::Split::unassigned) {
    corpus::Submission s;
    s.id = std::move(id);
    s.year = 2020;
    s.meta_review.sentences = std::move(meta);
    s.meta_review.decision = d;
    s.reviews = std::move(reviews);
    s.split = split;
    return s;
}

/// Category-flavoured sentence templates with a few slots, so that a
/// lexical tagger can separate the classes but sentences are not identical.
inline const std::vector<std::vector<std::string>>& templates() {
    static const std::vector<std::vector<std::string>> t = {
        // abstract
        {"This paper proposes a {n} method for {t}.", "The authors study {t} with a {n} model.",
         "The submission introduces a framework for {t}."},
        // strength
        {"The reviewers appreciate the clear writing and the {a} results.",
         "The idea is {a} and well motivated.", "A strength of the work is the {a} empirical evaluation."},
        // weakness
        {"However, the experiments on {t} are limited.", "The baselines are weak and the novelty is unclear.",
         "A major concern is the lack of comparison on {t}."},
        // rating summary
        {"The reviewers gave scores of {d}, {d} and {d}.", "Two reviewers rated the paper {d} and one rated it {d}.",
         "The average rating is {d} out of 10."},
        // ac disagreement
        {"I disagree with reviewer {d} on this point.", "Contrary to one reviewer, the AC finds the argument sound.",
         "The area chair does not share the concern raised by reviewer {d}."},
        // rebuttal process
        {"The authors responded in the rebuttal and addressed some concerns.",
         "After the discussion period the reviewers kept their scores.",
         "The rebuttal clarified the {t} setup."},
        // suggestion
        {"The authors should add ablations on {t} in the final version.",
         "I encourage the authors to release the code.", "Please include a discussion of related work on {t}."},
        // decision (accept / reject variants are chosen by the generator)
        {"I recommend acceptance as a poster.", "I recommend rejection at this time.",
         "The paper cannot be accepted in its current form."},
        // misc
        {"Thanks to everyone for the discussion.", "Thank you for submitting your paper to ICLR.",
         "See the individual reviews for details."},
    };
    return t;
}

inline std::string fill(std::string s, std::mt19937_64& rng) {
    static const std::vector<std::string> tasks = {"graph learning", "image retrieval", "language modeling",
                                                  "meta learning", "speech recognition", "program synthesis"};
    static const std::vector<std::string> nouns = {"novel", "simple", "hierarchical", "sparse", "recurrent"};
    static const std::vector<std::string> adjs = {"strong", "convincing", "solid", "impressive", "thorough"};
    auto replace = [&](const std::string& key, const std::vector<std::string>& pool) {
        for (auto p = s.find(key); p != std::string::npos; p = s.find(key))
            s.replace(p, key.size(), pool[uniform_below(rng, pool.size())]);
    };
    replace("{t}", tasks);
    replace("{n}", nouns);
    replace("{a}", adjs);
    for (auto p = s.find("{d}"); p != std::string::npos; p = s.find("{d}"))
        s.replace(p, 3, std::to_string(1 + uniform_below(rng, 9)));
    return s;
}

inline std::string sentence_for(Category c, Decision d, std::mt19937_64& rng) {
    const auto& pool = templates()[index_of(c)];
    if (c == Category::decision) return d == Decision::accept ? pool[0] : pool[1 + uniform_below(rng, 2)];
    return fill(pool[uniform_below(rng, pool.size())], rng);
}

/// n submissions whose meta-reviews follow abstract -> strength/weakness ->
/// (optional extras) -> decision, with three rated reviews each built from
/// the same templates. Splits are unassigned.
inline corpus::Corpus synthetic_corpus(std::size_t n, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    corpus::Corpus c;
    c.provenance.source = "synthetic";
    const std::vector<Category> extras = {Category::rating_summary, Category::ac_disagreement,
                                          Category::rebuttal_process, Category::suggestion, Category::misc};
    for (std::size_t i = 0; i < n; ++i) {
        const Decision d = uniform_below(rng, 2) ? Decision::accept : Decision::reject;
        std::vector<Category> labels = {Category::abstract};
        if (uniform_below(rng, 2)) labels.push_back(Category::abstract);
        labels.push_back(d == Decision::accept ? Category::strength : Category::weakness);
        if (d == Decision::reject || uniform_below(rng, 2)) labels.push_back(Category::weakness);
        for (std::size_t e = 0; e < 2; ++e)
            if (uniform_below(rng, 2)) labels.push_back(extras[uniform_below(rng, extras.size())]);
        labels.push_back(Category::decision);

        std::vector<corpus::LabeledSentence> meta;
        for (Category l : labels) meta.push_back({sentence_for(l, d, rng), l});

        std::vector<corpus::Review> reviews;
        for (int r = 0; r < 3; ++r) {
            std::string text;
            const std::vector<Category> rl = {Category::abstract, Category::strength, Category::weakness,
                                              Category::suggestion};
            for (std::size_t k = 0; k < rl.size(); ++k) {
                if (k == 2) text += "\n\n";
                else if (k) text += " ";
                text += sentence_for(rl[k], d, rng);
            }
            const int rating = d == Decision::accept ? 6 + int(uniform_below(rng, 3)) : 2 + int(uniform_below(rng, 4));
            reviews.push_back(review("R" + std::to_string(r + 1), text, rating));
        }
        c.submissions.push_back(submission("sub" + std::to_string(1000 + i), std::move(meta), d, std::move(reviews)));
    }
    return c;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("mred_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

    std::filesystem::path write(const std::string& name, const std::string& content) const {
        const auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace mred::testing
