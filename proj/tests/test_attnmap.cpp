#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mred/attnmap.hpp"
#include "mred/error.hpp"

using namespace mred;

namespace {

attn::Tensor random_tensor(std::mt19937_64& rng, std::size_t l, std::size_t t, std::size_t s) {
    attn::Tensor x{l, t, s, {}};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < l * t * s; ++i) x.values.push_back(u(rng));
    return x;
}

attn::Boundaries tiles(std::mt19937_64& rng, std::size_t n) {
    attn::Boundaries b;
    std::size_t pos = 0;
    while (pos < n) {
        const std::size_t len = std::min<std::size_t>(n - pos, 1 + rng() % 3);
        b.push_back({pos, pos + len});
        pos += len;
    }
    return b;
}

}  // namespace

TEST_CASE("hand worked two-sentence example") {
    // One layer, one output token, three input tokens in sentences [0,2) and [2,3).
    const attn::Tensor t{1, 1, 3, {0.1, 0.7, 0.2}};
    const auto m = attn::aggregate(t, {{0, 2}, {2, 3}}, {{0, 1}});
    REQUIRE(m.size() == 1);
    CHECK(m[0][0] == doctest::Approx(0.7));
    CHECK(m[0][1] == doctest::Approx(0.2));
    CHECK(attn::top_k_inputs(m, 0, 3) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("uniform attention gives constant times token count") {
    const attn::Tensor t{2, 5, 4, std::vector<double>(40, 0.25)};
    const auto m = attn::aggregate(t, {{0, 1}, {1, 4}}, {{0, 2}, {2, 5}});
    CHECK(m[0][0] == doctest::Approx(0.5));
    CHECK(m[0][1] == doctest::Approx(0.5));
    CHECK(m[1][0] == doctest::Approx(0.75));
}

TEST_CASE("aggregation properties") {
    std::mt19937_64 rng(9);
    for (int c = 0; c < 50; ++c) {
        const std::size_t L = 1 + rng() % 3, T = 1 + rng() % 6, S = 1 + rng() % 8;
        auto t = random_tensor(rng, L, T, S);
        const auto src = tiles(rng, S), tgt = tiles(rng, T);
        const auto m = attn::aggregate(t, src, tgt);

        // Layer order does not matter.
        attn::Tensor swapped = t;
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t s = 0; s < S; ++s) swapped.at(L - 1 - l, i, s) = t.at(l, i, s);
        const auto ms = attn::aggregate(swapped, src, tgt);
        for (std::size_t o = 0; o < m.size(); ++o)
            for (std::size_t s = 0; s < m[o].size(); ++s) CHECK(ms[o][s] == doctest::Approx(m[o][s]).epsilon(1e-12));

        // Scaling the tensor scales the matrix and leaves the ranking alone.
        attn::Tensor scaled = t;
        for (auto& v : scaled.values) v *= 3.0;
        const auto mc = attn::aggregate(scaled, src, tgt);
        for (std::size_t o = 0; o < m.size(); ++o) {
            for (std::size_t s = 0; s < m[o].size(); ++s) CHECK(mc[o][s] == doctest::Approx(3.0 * m[o][s]));
            CHECK(attn::top_k_inputs(mc, o) == attn::top_k_inputs(m, o));
        }

        // Splitting an input sentence never raises either half above the whole.
        const auto mean = attn::layer_mean(t);
        for (std::size_t s = 0; s < src.size(); ++s) {
            if (src[s].second - src[s].first < 2) continue;
            attn::Boundaries split;
            for (std::size_t k = 0; k < src.size(); ++k) {
                if (k != s) {
                    split.push_back(src[k]);
                    continue;
                }
                const auto mid = src[k].first + 1;
                split.push_back({src[k].first, mid});
                split.push_back({mid, src[k].second});
            }
            const auto m2 = attn::aggregate(t, split, tgt);
            for (std::size_t o = 0; o < m.size(); ++o) {
                CHECK(m2[o][s] <= m[o][s] + 1e-12);
                CHECK(m2[o][s + 1] <= m[o][s] + 1e-12);
            }
        }
    }
}

TEST_CASE("top_k") {
    const attn::Matrix m = {{0.2, 0.9, 0.9, 0.1, 0.5}};
    CHECK(attn::top_k_inputs(m, 0) == std::vector<std::size_t>{1, 2, 4});
    CHECK(attn::top_k_inputs(m, 0, 10).size() == 5);
    CHECK_THROWS_AS(attn::top_k_inputs(m, 0, 0), Error);
    CHECK_THROWS_AS(attn::top_k_inputs(m, 1), Error);
}

TEST_CASE("min_max scaling") {
    CHECK(attn::min_max({1, 3, 5}) == std::vector<double>{0, 0.5, 1});
    CHECK(attn::min_max({2, 2}) == std::vector<double>{0, 0});
    CHECK(attn::min_max({4}) == std::vector<double>{0});
    CHECK(attn::min_max({}).empty());
}

TEST_CASE("display heat covers selected sentences and control") {
    const attn::Tensor t{1, 2, 6, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1}};
    const auto mean = attn::layer_mean(t);
    const attn::Boundaries src = {{1, 3}, {3, 6}};
    const auto h = attn::display_heat(mean, {0, 2}, src, {1}, attn::Range{0, 1});
    std::vector<std::size_t> toks;
    for (const auto& x : h) {
        toks.push_back(x.token);
        CHECK(x.value >= 0.0);
        CHECK(x.value <= 1.0);
    }
    CHECK(toks == std::vector<std::size_t>{0, 3, 4, 5});
    // Column sums are all 0.7 here, so everything scales to zero.
    for (const auto& x : h) CHECK(x.value == 0.0);
    CHECK_THROWS_AS(attn::display_heat(mean, {0, 1}, src, {}), Error);
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(attn::Tensor({1, 1, 2, {0.5}}).validate(), Error);
    CHECK_THROWS_AS(attn::Tensor({1, 1, 1, {-0.5}}).validate(), Error);
    CHECK_THROWS_AS(attn::Tensor({0, 1, 1, {}}).validate(), Error);
    CHECK_THROWS_AS(attn::validate_boundaries({{0, 2}, {3, 4}}, 4), Error);
    CHECK_THROWS_AS(attn::validate_boundaries({{0, 2}}, 4), Error);
    CHECK_THROWS_AS(attn::validate_boundaries({{0, 0}, {0, 4}}, 4), Error);
    CHECK_NOTHROW(attn::validate_boundaries({{0, 2}, {2, 4}}, 4));
    CHECK(attn::boundaries_from_json(nlohmann::json::parse("[[0,2],[2,5]]")) == attn::Boundaries{{0, 2}, {2, 5}});
    CHECK_THROWS_AS(attn::boundaries_from_json(nlohmann::json::parse("[[0,2,3]]")), Error);
}

TEST_CASE("tensor text round trip and analyze") {
    std::mt19937_64 rng(1);
    const auto t = random_tensor(rng, 2, 3, 4);
    std::stringstream ss;
    attn::write_tensor(ss, t);
    const auto back = attn::read_tensor(ss);
    CHECK(back.layers == 2);
    for (std::size_t i = 0; i < t.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(t.values[i]));
    std::istringstream shortfile("1 2 2\n0.1 0.2 0.3");
    CHECK_THROWS_AS(attn::read_tensor(shortfile), Error);

    const auto j = attn::analyze(t, {{0, 2}, {2, 4}}, {{0, 1}, {1, 3}});
    CHECK(j["matrix"].size() == 2);
    CHECK(j["top3"][0].size() == 2);
    CHECK(j["heat"].size() == 2);
    CHECK(attn::matrix_svg(attn::aggregate(t, {{0, 2}, {2, 4}}, {{0, 3}})).find("<svg") == 0);
}
