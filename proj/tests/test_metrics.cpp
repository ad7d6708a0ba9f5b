#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "fixture.hpp"
#include "oracles.hpp"
#include "mred/error.hpp"
#include "mred/metrics.hpp"
#include "mred/text.hpp"

using namespace mred;
using metrics::Score;

namespace {

using oracle::random_labels;
using oracle::random_tokens;

void check_score(const Score& a, const Score& b) {
    CHECK(a.precision == b.precision);
    CHECK(a.recall == b.recall);
    CHECK(a.f1 == b.f1);
}

}  // namespace

TEST_CASE("rouge_n examples") {
    const auto s = metrics::rouge_n("the cat sat", "the cat", 1);
    CHECK(s.precision == doctest::Approx(2.0 / 3));
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == doctest::Approx(0.8));
    CHECK(metrics::rouge_n("a b c", "a b c", 1).f1 == 1.0);
    CHECK(metrics::rouge_n("a b c", "a b c", 2).f1 == 1.0);
    CHECK(metrics::rouge_n("alpha beta", "gamma delta", 1).f1 == 0.0);
    CHECK(metrics::rouge_n("", "", 1).f1 == 0.0);
}

TEST_CASE("rouge_l examples") {
    const auto s = metrics::rouge_l("a b c d", "a c");
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == doctest::Approx(2.0 / 3));
    const auto t = metrics::rouge_l("a c", "a b c d");
    CHECK(t.precision == 1.0);
    CHECK(t.recall == 0.5);
    CHECK(metrics::rouge_l("", "a b").f1 == 0.0);
    CHECK(metrics::rouge_l("same words here", "same words here").f1 == 1.0);
}

TEST_CASE("rouge_n equals exhaustive n-gram oracle on 200 random pairs") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto c = random_tokens(rng, 10), r = random_tokens(rng, 10);
        for (int n : {1, 2}) check_score(metrics::rouge_n(c, r, n), oracle::ngram(c, r, n));
    }
}

TEST_CASE("rouge_l and lcs equal the recursive oracle on 200 random pairs") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto c = random_tokens(rng, 10), r = random_tokens(rng, 10);
        const auto l = oracle::lcs(c, r);
        CHECK(metrics::lcs_length(c, r) == l);
        const auto s = metrics::rouge_l(c, r);
        if (c.empty() || r.empty()) {
            CHECK(s.f1 == 0.0);
            continue;
        }
        Score o;
        o.precision = double(l) / double(c.size());
        o.recall = double(l) / double(r.size());
        o.f1 = l ? 2 * o.precision * o.recall / (o.precision + o.recall) : 0;
        check_score(s, o);
    }
}

TEST_CASE("rouge scores match rouge_score on frozen cases") {
    std::ifstream in(std::string(MRED_TEST_DATA_DIR) + "/rouge_frozen.json");
    const auto j = nlohmann::json::parse(in);
    for (const auto& c : j.at("cases")) {
        const auto cand = c.at("candidate").get<std::string>();
        const auto ref = c.at("reference").get<std::string>();
        CAPTURE(cand);
        CAPTURE(ref);
        const auto& sc = c.at("scores");
        const Score got[3] = {metrics::rouge_n(cand, ref, 1), metrics::rouge_n(cand, ref, 2), metrics::rouge_l(cand, ref)};
        const char* keys[3] = {"rouge1", "rouge2", "rougeL"};
        for (int k = 0; k < 3; ++k) {
            CHECK(got[k].precision == doctest::Approx(sc[keys[k]][0].get<double>()).epsilon(1e-12));
            CHECK(got[k].recall == doctest::Approx(sc[keys[k]][1].get<double>()).epsilon(1e-12));
            CHECK(got[k].f1 == doctest::Approx(sc[keys[k]][2].get<double>()).epsilon(1e-12));
        }
    }
}

TEST_CASE("rouge F1 bounds and symmetry") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_tokens(rng, 10), b = random_tokens(rng, 10);
        for (int n : {1, 2}) {
            const auto ab = metrics::rouge_n(a, b, n), ba = metrics::rouge_n(b, a, n);
            CHECK(ab.f1 >= 0.0);
            CHECK(ab.f1 <= 1.0);
            CHECK(ab.f1 == doctest::Approx(ba.f1));
            CHECK(ab.precision == ba.recall);
        }
    }
}

TEST_CASE("levenshtein equals DP oracle on random label sequences") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_labels(rng, 12), b = random_labels(rng, 12);
        CHECK(metrics::levenshtein(a, b) == oracle::edit(a, b));
    }
}

TEST_CASE("structure similarity") {
    using C = Category;
    const std::vector<C> aw = {C::abstract, C::weakness}, awd = {C::abstract, C::weakness, C::decision};
    CHECK(metrics::structure_similarity(awd, awd) == 1.0);
    CHECK(metrics::structure_similarity(std::vector<C>{C::abstract}, std::vector<C>{C::decision}) == 0.0);
    CHECK(metrics::structure_similarity(aw, awd) == doctest::Approx(1 - 1.0 / 3));
    CHECK_THROWS_AS(metrics::structure_similarity(aw, std::vector<C>{}), Error);
    CHECK(metrics::structure_similarity(std::vector<C>{}, aw) == 0.0);

    std::mt19937_64 rng(15);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_labels(rng, 12, 1), b = random_labels(rng, 12, 1);
        const double s = metrics::structure_similarity(a, b);
        CHECK(s == 1.0 - double(oracle::edit(a, b)) / double(std::max(a.size(), b.size())));
        CHECK(s == metrics::structure_similarity(b, a));
        CHECK((s == 1.0) == (a == b));
    }
}

TEST_CASE("decision correctness") {
    CHECK(metrics::decision_correctness("I recommend rejection.", Decision::reject) == 1);
    CHECK(metrics::decision_correctness("I recommend rejection.", Decision::accept) == 0);
    CHECK(metrics::decision_correctness("happy to recommend acceptance", Decision::reject) == 0);
    CHECK(metrics::decision_correctness("happy to recommend acceptance", Decision::accept) == 1);
    CHECK(metrics::decision_correctness("I recommend acceptance, but also recommend to reject.", Decision::accept) == 0);
    CHECK(metrics::decision_correctness("The paper studies graphs.", Decision::accept) == 0);
    // "not accept" must not also count as an accept cue.
    CHECK(metrics::decision_correctness("I cannot recommend acceptance.", Decision::reject) == 1);
    CHECK(metrics::decision_correctness("The paper cannot be accepted in its current form.", Decision::reject) == 1);
    const auto hits = metrics::find_cues("We cannot recommend acceptance of this paper.");
    CHECK(hits.accept.empty());
    CHECK_FALSE(hits.reject.empty());
    CHECK(metrics::DecisionCues::builtin().version >= 1);
}

TEST_CASE("evaluate_run aggregates by id") {
    using C = Category;
    std::vector<metrics::RunReference> refs = {
        {"a", "The paper is good. I recommend acceptance.", {C::strength, C::decision}, Decision::accept},
        {"b", "The paper is weak; reject.", {C::weakness}, Decision::reject}};
    std::vector<metrics::RunOutput> outs = {{"b", refs[1].text, refs[1].labels}, {"a", refs[0].text, refs[0].labels}};
    const auto rep = metrics::evaluate_run(outs, refs);
    CHECK(rep.n_instances == 2);
    CHECK(rep.r1 == 1.0);
    CHECK(rep.r2 == 1.0);
    CHECK(rep.rl == 1.0);
    CHECK(rep.structure_sim_sent == 1.0);
    CHECK(rep.structure_sim_seg == 1.0);
    CHECK(rep.decision_correct == 1.0);

    const auto one = metrics::evaluate_run(std::span(outs).subspan(1, 1), std::span(refs).first(1));
    const auto inst = metrics::score_instance(outs[1], refs[0]);
    CHECK(one.r1 == inst.r1.f1);

    outs[0].id = "c";
    CHECK_THROWS_AS(metrics::evaluate_run(outs, refs), Error);
    outs.pop_back();
    CHECK_THROWS_AS(metrics::evaluate_run(outs, refs), Error);
}

TEST_CASE("evaluate_run without labels or decisions leaves those means out") {
    std::vector<metrics::RunReference> refs = {{"a", "x y z", {}, std::nullopt}};
    std::vector<metrics::RunOutput> outs = {{"a", "x y", {}}};
    const auto rep = metrics::evaluate_run(outs, refs);
    CHECK(rep.n_structure == 0);
    CHECK(rep.n_decision == 0);
    const auto j = rep.to_json();
    CHECK(j["structure_sim_sent"].is_null());
    CHECK(j["decision_correct"].is_null());
    CHECK(j["r1"].get<double>() == doctest::Approx(0.8));
}

TEST_CASE("seg structure similarity uses collapsed sequences") {
    using C = Category;
    std::vector<metrics::RunReference> refs = {{"a", "t", {C::abstract, C::abstract, C::decision}, std::nullopt}};
    std::vector<metrics::RunOutput> outs = {{"a", "t", {C::abstract, C::decision}}};
    const auto rep = metrics::evaluate_run(outs, refs);
    CHECK(rep.structure_sim_sent == doctest::Approx(2.0 / 3));
    CHECK(rep.structure_sim_seg == 1.0);
}
