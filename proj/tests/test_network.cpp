#include "attn/network.hpp"
#include "attn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace attn;
using namespace attn::nn;

namespace {

ModelSpec small_spec(Architecture a, Fusion f) {
    ModelSpec s;
    s.architecture = a;
    s.fusion = f;
    s.widths = {3, 4, 4, 5};
    s.dense = 6;
    s.input_height = 16;
    s.input_width = 24;
    s.input_pool = 1;
    return s;
}

template <typename T>
std::vector<T> random_input(const ModelSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<T> x(s.prepared_size());
    for (auto& v : x) v = static_cast<T>(rng.uniform());
    return x;
}

}  // namespace

TEST_CASE("parameter count of the default model") {
    ModelSpec s;
    // conv: 3*8*9+8, 8*16*9+16, 16*32*9+32, 32*64*9+64; dense 64*64+64; head 64+1
    CHECK(conv_parameter_count(s) == 224 + 1168 + 4640 + 18496);
    CHECK(parameter_count(s) == 224 + 1168 + 4640 + 18496 + 4160 + 65);
    s.fusion = Fusion::model_level;
    CHECK(parameter_count(s) == 3 * (80 + 1168 + 4640 + 18496 + 4160) + 3 * 64 + 1);
    s.architecture = Architecture::mini_residual;
    CHECK(parameter_count(s) == 3 * (80 + 1168 + 4640 + 18496 + 4160) + 3 * 64 + 1);
}

TEST_CASE("spec validation rejects collapsing inputs") {
    ModelSpec s;
    s.input_height = 8;
    s.input_width = 8;
    CHECK_THROWS(s.validate());
}

TEST_CASE("same seed gives bit-identical predictions") {
    for (auto f : {Fusion::feature_level, Fusion::model_level}) {
        const auto s = small_spec(Architecture::mini_plain, f);
        Network<float> a(s), b(s);
        a.init(42);
        b.init(42);
        const auto x = random_input<float>(s, 1);
        CHECK(a.forward(x) == b.forward(x));
        Network<float> c(s);
        c.init(43);
        CHECK(c.forward(x) != a.forward(x));
    }
}

TEST_CASE("predictions lie strictly inside (0, 1)") {
    for (auto a : {Architecture::mini_plain, Architecture::mini_residual}) {
        const auto s = small_spec(a, Fusion::feature_level);
        Network<double> net(s);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            net.init(seed);
            const double p = net.forward(random_input<double>(s, seed + 100));
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("zero head weights predict sigmoid(bias)") {
    const auto s = small_spec(Architecture::mini_residual, Fusion::model_level);
    Network<double> net(s);
    net.init(5);
    auto p = net.parameters();
    const std::size_t head = net.head_offset();
    for (std::size_t i = head; i + 1 < p.size(); ++i) p[i] = 0.0;
    p[p.size() - 1] = 0.3;
    const double expected = 1.0 / (1.0 + std::exp(-0.3));
    for (std::uint64_t seed = 0; seed < 3; ++seed) CHECK(net.forward(random_input<double>(s, seed)) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("label equal to the prediction gives a zero gradient") {
    const auto s = small_spec(Architecture::mini_plain, Fusion::feature_level);
    Network<double> net(s);
    net.init(7);
    const auto x = random_input<double>(s, 3);
    const double y = net.forward(x);
    std::vector<double> grad(net.parameters().size(), 0.0);
    net.accumulate_gradient(x, y, 1.0, grad);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("zero residual block is the identity on non-negative input") {
    const int c = 3, h = 6, w = 5;
    Rng rng(2);
    std::vector<double> x(static_cast<std::size_t>(c) * h * w);
    for (auto& v : x) v = rng.uniform(0.0, 2.0);
    const std::vector<double> weight(static_cast<std::size_t>(c) * c * 9, 0.0), bias(c, 0.0);
    const auto y = block_forward<double>(x, c, h, w, weight, bias, c, true, false);
    CHECK(y == x);
}

TEST_CASE("adam with zero learning rate leaves weights unchanged") {
    std::vector<float> w{0.5f, -1.0f, 2.0f}, g{0.1f, 0.2f, -0.3f};
    const auto before = w;
    Adam<float> opt(w.size());
    opt.step(w, g, 0.0);
    CHECK(w == before);
    CHECK(opt.steps() == 1);
}

TEST_CASE("pool_input averages blocks") {
    std::vector<double> x(3 * 4 * 4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const auto p = pool_input<double>(x, 4, 4, 2);
    REQUIRE(p.size() == 3 * 2 * 2);
    CHECK(p[0] == (0 + 1 + 4 + 5) / 4.0);
    CHECK(p[3] == (10 + 11 + 14 + 15) / 4.0);
}
