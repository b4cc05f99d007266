#include "attn/error.hpp"
#include "attn/evaluation.hpp"
#include "attn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace attn;
using namespace attn::eval;

TEST_CASE("regression metrics: hand values") {
    const std::vector<double> t{0.1, 0.5, 0.9};
    const auto perfect = regression_metrics(t, t);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(*perfect.r2 == doctest::Approx(1.0));
    CHECK(*perfect.pcc == doctest::Approx(1.0));

    CHECK(*regression_metrics(std::vector<double>{3, 1}, std::vector<double>{1, 3}).pcc == doctest::Approx(-1.0));

    const auto m = regression_metrics(std::vector<double>{0.2, 0.4, 0.9}, std::vector<double>{0.1, 0.5, 0.8});
    CHECK(m.mse == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("regression metrics: constant truth leaves r2 and pcc undefined") {
    const auto m = regression_metrics(std::vector<double>{0.2, 0.4}, std::vector<double>{0.3, 0.3});
    CHECK(m.mse == doctest::Approx(0.01));
    CHECK_FALSE(m.r2.has_value());
    CHECK_FALSE(m.pcc.has_value());
    CHECK_THROWS_AS(regression_metrics(std::vector<double>{1}, std::vector<double>{1, 2}), LengthMismatch);
    CHECK_THROWS_AS(regression_metrics(std::vector<double>{}, std::vector<double>{}), LengthMismatch);
}

TEST_CASE("pcc is invariant to positive affine maps and r2 never exceeds one") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p(50), t(50), q(50);
        for (std::size_t i = 0; i < 50; ++i) {
            t[i] = rng.uniform();
            p[i] = 0.6 * t[i] + 0.4 * rng.uniform();
        }
        const double a = rng.uniform(0.1, 10.0), b = rng.uniform(-5.0, 5.0);
        for (std::size_t i = 0; i < 50; ++i) q[i] = a * p[i] + b;
        const auto base = regression_metrics(p, t);
        CHECK(std::abs(*regression_metrics(q, t).pcc - *base.pcc) < 1e-9);
        CHECK(std::abs(*regression_metrics(t, q).pcc - *regression_metrics(t, p).pcc) < 1e-9);
        CHECK(*base.r2 <= 1.0);
        CHECK(*regression_metrics(q, t).r2 <= 1.0);
    }
}

TEST_CASE("r2 equals pcc squared for the least-squares affine fit") {
    Rng rng(23);
    std::vector<double> x(40), t(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = rng.uniform();
        t[i] = 0.3 + 0.5 * x[i] + 0.1 * rng.uniform();
    }
    double mx = 0, mt = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        mx += x[i] / 40;
        mt += t[i] / 40;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        sxy += (x[i] - mx) * (t[i] - mt);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    std::vector<double> fit(40);
    for (std::size_t i = 0; i < 40; ++i) fit[i] = mt + sxy / sxx * (x[i] - mx);
    const auto m = regression_metrics(fit, t);
    CHECK(*m.r2 == doctest::Approx(*m.pcc * *m.pcc).epsilon(1e-9));
}

TEST_CASE("discretize3 uses strict thresholds") {
    CHECK(discretize3(std::vector<double>{0.1, 0.3, 0.7}) == std::vector<Zone>{Zone::low, Zone::medium, Zone::high});
    CHECK(discretize3(std::vector<double>{0.2, 0.5}) == std::vector<Zone>{Zone::medium, Zone::medium});
    CHECK(discretize3(std::vector<double>{}).empty());
    Rng rng(1);
    std::vector<double> v(200), rep;
    for (auto& x : v) x = rng.uniform();
    const auto zones = discretize3(v);
    for (auto z : zones) rep.push_back(z == Zone::low ? 0.1 : z == Zone::medium ? 0.35 : 0.75);
    CHECK(discretize3(rep) == zones);
}

TEST_CASE("classification accuracy and confusion") {
    const std::vector<double> t{0.1, 0.3, 0.8};
    const auto same = classification_accuracy(t, t);
    CHECK(same.acc3 == 1.0);
    for (int i = 0; i < 3; ++i) CHECK(same.confusion[i][i] == 1);

    const auto wrong = classification_accuracy(std::vector<double>(6, 0.9), std::vector<double>(6, 0.1));
    CHECK(wrong.acc3 == 0.0);
    CHECK(wrong.confusion[0][2] == 6);

    const auto mixed = classification_accuracy(std::vector<double>{0.1, 0.6, 0.3, 0.9},
                                               std::vector<double>{0.15, 0.4, 0.25, 0.95});
    CHECK(mixed.acc3 == 0.75);
    CHECK(mixed.confusion[1][2] == 1);
}

TEST_CASE("fold construction") {
    const std::vector<std::string> lessons{"L1", "L2", "L3", "L4", "L5", "L6", "L7"};
    const auto fixed = make_folds(lessons, CvMode::fixed);
    REQUIRE(fixed.size() == 1);
    CHECK(fixed[0].train == std::vector<std::string>{"L1", "L2", "L3", "L4", "L5"});
    CHECK(fixed[0].val == "L6");
    CHECK(fixed[0].test == "L7");

    const auto seven = make_folds(lessons, CvMode::sevenfold);
    REQUIRE(seven.size() == 7);
    std::set<std::string> tests;
    for (std::size_t k = 0; k < 7; ++k) {
        tests.insert(seven[k].test);
        CHECK(seven[k].test == lessons[k]);
        CHECK(seven[k].val == lessons[(k + 6) % 7]);
        CHECK(seven[k].train.size() == 5);
        std::set<std::string> all(seven[k].train.begin(), seven[k].train.end());
        all.insert(seven[k].val);
        all.insert(seven[k].test);
        CHECK(all.size() == 7);
    }
    CHECK(tests.size() == 7);
    CHECK_THROWS_AS(make_folds({"L1", "L2"}, CvMode::sevenfold), MissingLesson);
}

TEST_CASE("aggregate is the unweighted fold mean and skips undefined folds") {
    EvalReport r;
    FoldMetrics a, b;
    a.raw = {0.1, 0.2, 0.5, 0.8};
    a.raw_cls.acc3 = 0.5;
    b.raw = {0.3, 0.4, std::nullopt, std::nullopt};
    b.raw_cls.acc3 = 1.0;
    a.smoothed = a.raw;
    b.smoothed = b.raw;
    r.per_fold = {a, b};
    aggregate(r);
    CHECK(r.raw.mse == doctest::Approx(0.2));
    CHECK(r.raw.mae == doctest::Approx(0.3));
    CHECK(*r.raw.pcc == doctest::Approx(0.8));
    CHECK(r.raw.acc3 == doctest::Approx(0.75));
}
