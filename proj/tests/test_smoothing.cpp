#include "attn/error.hpp"
#include "attn/rng.hpp"
#include "attn/smoothing.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace attn;
using namespace attn::smoothing;

namespace {

Series random_series(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Series s(n);
    for (auto& v : s) v = rng.uniform(-3.0, 3.0);
    return s;
}

double total_variation(const Series& s) {
    double tv = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) tv += std::abs(s[i] - s[i - 1]);
    return tv;
}

}  // namespace

TEST_CASE("moving average: hand values") {
    const Series c{2.5, 2.5, 2.5, 2.5, 2.5};
    CHECK(moving_average(c) == c);
    CHECK(moving_average(Series{0, 0, 5, 0, 0})[2] == 1.0);
    CHECK(moving_average(Series{1, 2, 3, 4, 5}, 3) == Series{1.5, 2, 3, 4, 4.5});
}

TEST_CASE("moving average: bounds, monotonicity and total variation") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = random_series(seed, 40);
        const auto y = moving_average(s);
        REQUIRE(y.size() == s.size());
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        for (double v : y) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
        CHECK(total_variation(y) <= total_variation(s) + 1e-12);

        auto sorted = s;
        std::sort(sorted.begin(), sorted.end());
        const auto m = moving_average(sorted);
        const auto k = kalman_1d(sorted);
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            CHECK(m[i] >= m[i - 1] - 1e-12);
            CHECK(k[i] >= k[i - 1] - 1e-12);
        }
    }
}

TEST_CASE("savitzky-golay reproduces quadratics and constants") {
    Series q(30), c(30, -1.25);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<double>(i * i);
    const auto yq = savitzky_golay(q);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(yq[i] - q[i]) < 1e-9);
    const auto yc = savitzky_golay(c);
    for (double v : yc) CHECK(std::abs(v + 1.25) < 1e-12);
}

TEST_CASE("savitzky-golay is linear") {
    const auto a = random_series(2, 50), b = random_series(3, 50);
    Series mix(50);
    for (std::size_t i = 0; i < 50; ++i) mix[i] = 1.7 * a[i] - 0.4 * b[i];
    const auto ya = savitzky_golay(a), yb = savitzky_golay(b), ym = savitzky_golay(mix);
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(ym[i] - (1.7 * ya[i] - 0.4 * yb[i])) < 1e-9);
}

TEST_CASE("savitzky-golay rejects short input") {
    CHECK_THROWS_AS(savitzky_golay(Series{1, 2, 3}), SeriesTooShort);
    CHECK_THROWS_AS(savitzky_golay(Series{}), EmptySeries);
}

TEST_CASE("kalman: constant and single-element series") {
    const Series c(25, 0.75);
    for (double v : kalman_1d(c)) CHECK(v == 0.75);
    CHECK(kalman_1d(Series{3.5}) == Series{3.5});
}

TEST_CASE("all smoothers preserve length") {
    const auto s = random_series(4, 95);
    for (auto which : {Smoother::none, Smoother::moving_average, Smoother::savitzky_golay, Smoother::kalman}) {
        CHECK(smoothing::apply(which, s).size() == s.size());
    }
    CHECK(smoothing::apply(Smoother::none, s) == s);
}

TEST_CASE("smoother names round trip") {
    for (auto name : {"none", "ma", "sg", "kalman"}) CHECK(smoother_name(parse_smoother(name)) == name);
    CHECK_THROWS_AS(parse_smoother("median"), InputError);
}
