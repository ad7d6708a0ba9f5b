#include <doctest.h>

#include <random>

#include "fixture.hpp"
#include "mred/control.hpp"
#include "mred/error.hpp"
#include "mred/text.hpp"

using namespace mred;
using C = Category;

namespace {

corpus::MetaReview meta(std::vector<C> labels) {
    corpus::MetaReview m;
    for (C c : labels) m.sentences.push_back({"Sentence.", c});
    return m;
}

}  // namespace

TEST_CASE("sent and seg control") {
    const auto m = meta({C::abstract, C::abstract, C::decision});
    const auto s = control::sent_ctrl(m);
    CHECK(s.labels == std::vector<C>{C::abstract, C::abstract, C::decision});
    CHECK(s.granularity == control::Granularity::sent);
    const auto g = control::seg_ctrl(m);
    CHECK(g.labels == std::vector<C>{C::abstract, C::decision});
    CHECK(g.granularity == control::Granularity::seg);
    CHECK(control::seg_ctrl(meta({C::misc, C::misc, C::misc})).labels.size() == 1);
    CHECK(control::sent_ctrl(meta({C::misc})).labels.size() == 1);
    CHECK_FALSE(control::for_mode(control::Mode::unctrl, m));
    CHECK(control::for_mode(control::Mode::seg_ctrl, m)->labels == g.labels);

    for (const auto& sub : mred::testing::synthetic_corpus(30).submissions) {
        const auto sent = control::sent_ctrl(sub.meta_review).labels;
        CHECK(control::seg_ctrl(sub.meta_review).labels == collapse_runs(sent));
        CHECK(collapse_runs(collapse_runs(sent)) == collapse_runs(sent));
    }
}

TEST_CASE("prefix encoding") {
    const control::ControlSequence aad{{C::abstract, C::abstract, C::decision}, control::Granularity::sent};
    CHECK(control::encode_prefix(aad, "T") == "abstract | abstract | decision ==> T");
    CHECK(control::encode_prefix(std::nullopt, "T") == "T");
    const control::ControlSequence m{{C::misc}, control::Granularity::sent};
    CHECK(control::encode_prefix(m, "") == "misc ==> ");
    const control::ControlSequence rs{{C::rating_summary, C::ac_disagreement, C::rebuttal_process},
                                      control::Granularity::sent};
    CHECK(control::encode_prefix(rs, "x") == "rating summary | ac disagreement | rebuttal process ==> x");
}

TEST_CASE("prefix round trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        control::ControlSequence c;
        const auto n = 1 + uniform_below(rng, 6);
        for (std::size_t k = 0; k < n; ++k) c.labels.push_back(kAllCategories[uniform_below(rng, 9)]);
        const std::string body = i % 3 ? "Some body text, numbers 3 | pipes" : "";
        const auto d = control::decode_prefix(control::encode_prefix(c, body));
        REQUIRE(d.labels);
        CHECK(*d.labels == c.labels);
        CHECK(d.body == body);
    }
    const auto plain = control::decode_prefix("no control here");
    CHECK_FALSE(plain.labels);
    CHECK(plain.body == "no control here");
}

TEST_CASE("parse_labels") {
    CHECK(control::parse_labels("abstract | weakness | decision") ==
          std::vector<C>{C::abstract, C::weakness, C::decision});
    CHECK(control::parse_labels("rating  summary|rating_summary") ==
          std::vector<C>{C::rating_summary, C::rating_summary});
    CHECK_THROWS_AS(control::parse_labels("abstract | nonsense"), Error);
}

TEST_CASE("truncate_encoded keeps the prefix") {
    const control::ControlSequence c{{C::abstract, C::weakness, C::decision}, control::Granularity::sent};
    std::string body;
    for (int i = 0; i < 2000; ++i) body += (i ? " w" : "w") + std::to_string(i);
    const auto enc = control::encode_prefix(c, body);
    // Prefix tokens: abstract | weakness | decision ==>  -> 6
    const auto t = control::truncate_encoded(enc, 1024);
    CHECK(text::word_count(t) == 1024);
    const auto d = control::decode_prefix(t);
    REQUIRE(d.labels);
    CHECK(*d.labels == c.labels);
    CHECK(text::word_count(d.body) == 1018);
    CHECK(d.body.substr(0, 6) == "w0 w1 ");

    CHECK(control::truncate_encoded("a b c", 10) == "a b c");
    CHECK(control::truncate_encoded(enc, 100000) == enc);
    CHECK_THROWS_AS(control::truncate_encoded(enc, 3), Error);
    // The prefix alone always survives.
    for (std::size_t limit = 6; limit < 40; ++limit) CHECK(*control::decode_prefix(control::truncate_encoded(enc, limit)).labels == c.labels);
}

TEST_CASE("encode_submission record") {
    const auto sub = mred::testing::synthetic_corpus(1).submissions[0];
    const combine::TfidfSimilarity tfidf;
    const auto r = control::encode_submission(sub, combine::Strategy::rate_concat, control::Mode::sent_ctrl, tfidf);
    CHECK(r.id == sub.id);
    CHECK(*r.control == sub.meta_review.labels());
    CHECK(r.reference == sub.meta_review.text());
    CHECK(r.input.find(" ==> R1 rating score: ") != std::string::npos);
    const auto back = control::EncodedRecord::from_json(r.to_json());
    CHECK(back.input == r.input);
    CHECK(back.control == r.control);

    const auto u = control::encode_submission(sub, combine::Strategy::concat, control::Mode::unctrl, tfidf, 10);
    CHECK_FALSE(u.control);
    CHECK(u.to_json()["control"].is_null());
    CHECK(text::word_count(u.input) == 10);
}

TEST_CASE("mode names") {
    for (auto m : {control::Mode::unctrl, control::Mode::sent_ctrl, control::Mode::seg_ctrl})
        CHECK(control::parse_mode(control::mode_name(m)) == m);
    CHECK_THROWS_AS(control::parse_mode("ctrl"), Error);
}
