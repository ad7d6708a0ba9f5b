#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixture.hpp"
#include "mred/analytics.hpp"

using namespace mred;
using analytics::TransitionMatrix;
using C = Category;

namespace {

corpus::Submission with_labels(const std::string& id, std::vector<C> labels, Decision d = Decision::accept,
                               std::vector<std::optional<int>> ratings = {6}) {
    std::vector<corpus::LabeledSentence> meta;
    for (C c : labels) meta.push_back({"sentence " + std::string(storage_name(c)) + ".", c});
    std::vector<corpus::Review> reviews;
    for (std::size_t i = 0; i < ratings.size(); ++i)
        reviews.push_back(mred::testing::review("R" + std::to_string(i + 1), "Review text.", ratings[i]));
    return mred::testing::submission(id, std::move(meta), d, std::move(reviews));
}

std::size_t st(C c) { return TransitionMatrix::state_of(c); }

}  // namespace

TEST_CASE("segments collapse runs and expand back") {
    corpus::MetaReview m;
    for (C c : {C::abstract, C::abstract, C::weakness, C::decision}) m.sentences.push_back({"x.", c});
    CHECK(analytics::segments(m) == std::vector<C>{C::abstract, C::weakness, C::decision});

    for (const auto& s : mred::testing::synthetic_corpus(30).submissions) {
        const auto seg = analytics::segments(s.meta_review);
        for (std::size_t i = 1; i < seg.size(); ++i) CHECK(seg[i] != seg[i - 1]);
        // Expanding each run reconstructs the label sequence.
        std::vector<C> expanded;
        const auto labels = s.meta_review.labels();
        std::size_t pos = 0;
        for (C c : seg)
            while (pos < labels.size() && labels[pos] == c) expanded.push_back(labels[pos++]);
        CHECK(expanded == labels);
    }
}

TEST_CASE("single path transition matrix") {
    const std::vector<corpus::Submission> subs = {with_labels("a", {C::abstract, C::weakness, C::decision})};
    const auto t = analytics::transition_matrix(subs);
    CHECK(t.probs[TransitionMatrix::kStart][st(C::abstract)] == 1.0);
    CHECK(t.probs[st(C::abstract)][st(C::weakness)] == 1.0);
    CHECK(t.probs[st(C::weakness)][st(C::decision)] == 1.0);
    CHECK(t.probs[st(C::decision)][TransitionMatrix::kEnd] == 1.0);
}

TEST_CASE("transition matrix invariants") {
    const auto c = mred::testing::synthetic_corpus(60);
    const auto t = analytics::transition_matrix(c.submissions);
    std::size_t start_total = 0;
    for (std::size_t j = 0; j < TransitionMatrix::kStates; ++j) start_total += t.counts[TransitionMatrix::kStart][j];
    CHECK(start_total == c.submissions.size());
    for (std::size_t i = 0; i < TransitionMatrix::kStates; ++i) {
        CHECK(t.counts[i][TransitionMatrix::kStart] == 0);
        CHECK(t.counts[TransitionMatrix::kEnd][i] == 0);
        std::size_t n = 0;
        double sum = 0;
        for (std::size_t j = 0; j < TransitionMatrix::kStates; ++j) {
            n += t.counts[i][j];
            sum += t.probs[i][j];
        }
        if (n) CHECK(std::abs(sum - 1.0) <= 1e-9);
        // Segments never repeat a label.
        if (i != TransitionMatrix::kStart && i != TransitionMatrix::kEnd) CHECK(t.counts[i][i] == 0);
    }
    const auto& start = t.probs[TransitionMatrix::kStart];
    CHECK(std::max_element(start.begin(), start.end()) - start.begin() == std::ptrdiff_t(st(C::abstract)));

    const auto j = t.to_json();
    CHECK(j.contains("probs"));
    CHECK(t.to_svg().find("<svg") == 0);
    CHECK(t.to_csv().find('\n') != std::string::npos);
}

TEST_CASE("category distribution counts") {
    std::vector<corpus::Submission> empty;
    const auto z = analytics::category_distribution(empty);
    for (const auto& r : z.rows)
        for (auto k : r.counts) CHECK(k == 0);

    const auto c = mred::testing::synthetic_corpus(50);
    const auto d = analytics::category_distribution(c.submissions);
    std::size_t total = 0;
    for (const auto& r : d.rows) {
        double pct = 0;
        for (std::size_t i = 0; i < r.counts.size(); ++i) {
            total += r.counts[i];
            pct += r.percent[i];
        }
        if (r.total) CHECK(std::abs(pct - 100.0) <= 0.1);
    }
    CHECK(total == c.sentence_count());

    // Permutation invariance.
    auto rev = c.submissions;
    std::reverse(rev.begin(), rev.end());
    CHECK(analytics::category_distribution(rev).to_json() == d.to_json());
}

TEST_CASE("length category breakdown of a single sentence") {
    const std::vector<corpus::Submission> subs = {with_labels("a", {C::weakness})};
    const auto r = analytics::length_category_breakdown(subs);
    CHECK(r.percent("<=50", "weakness") == 100.0);
}

TEST_CASE("length rating breakdown") {
    const std::vector<corpus::Submission> subs = {with_labels("a", {C::weakness}, Decision::reject, {1, 2}),
                                                  with_labels("b", {C::weakness}, Decision::reject, {std::nullopt})};
    const auto r = analytics::length_rating_breakdown(subs);
    CHECK(r.excluded == 1);
    CHECK(r.percent("<2", "<=50") == 100.0);
    CHECK(r.count("<2", "<=50") == 1);
}

TEST_CASE("borderline breakdown keeps only the score range") {
    const std::vector<corpus::Submission> none = {with_labels("a", {C::abstract}, Decision::accept, {9})};
    const auto e = analytics::borderline_breakdown(none);
    std::size_t n = 0;
    for (const auto& r : e.rows) n += r.total;
    CHECK(n == 0);

    const std::vector<corpus::Submission> subs = {
        with_labels("a", {C::abstract, C::strength, C::decision}, Decision::accept, {5}),
        with_labels("b", {C::weakness, C::weakness}, Decision::reject, {5, 4}),
        with_labels("c", {C::weakness}, Decision::reject, {2})};
    const auto b = analytics::borderline_breakdown(subs);
    CHECK(b.percent("accept", "abstract") == doctest::Approx(100.0 / 3));
    CHECK(b.percent("reject", "weakness") == 100.0);
    CHECK(b.count("reject", "weakness") == 2);
}

TEST_CASE("occurrence counts a meta-review once per category") {
    const std::vector<corpus::Submission> subs = {
        with_labels("a", {C::weakness, C::weakness, C::decision}, Decision::reject, {3}),
        with_labels("b", {C::abstract, C::decision}, Decision::reject, {4})};
    const auto r = analytics::occurrence_by_score(subs);
    CHECK_FALSE(r.row_sums_to_100);
    CHECK(r.count("reject/low", "weakness") == 1);
    CHECK(r.percent("reject/low", "weakness") == 50.0);
    CHECK(r.percent("reject/low", "decision") == 100.0);
}

TEST_CASE("palette has a color per category") {
    std::set<std::string_view> seen;
    for (C c : kAllCategories) {
        const auto col = analytics::category_color(c);
        CHECK(col.size() == 7);
        CHECK(col[0] == '#');
        seen.insert(col);
    }
    CHECK(seen.size() == kNumCategories);
}
