#include "attn/error.hpp"
#include "attn/fixtures.hpp"
#include "attn/fusion_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace attn;
using namespace attn::fusion;

namespace {

FeatureMap map_of(Modality m, int seg, std::uint8_t fill, const std::string& lesson = "L1") {
    return {m, lesson, seg, GrayImage(4, 6, fill)};
}

nn::ModelSpec tiny_spec() {
    nn::ModelSpec s;
    s.widths = {3, 4, 4, 5};
    s.dense = 6;
    s.input_height = 16;
    s.input_width = 24;
    s.input_pool = 1;
    return s;
}

SampleRefs refs(const std::vector<FusedSample>& v) {
    SampleRefs out;
    for (const auto& s : v) out.push_back(&s);
    return out;
}

}  // namespace

TEST_CASE("feature-level fusion assigns channels in order") {
    const auto zero = fuse_feature_level(map_of(Modality::action, 0, 0), map_of(Modality::slide, 0, 0),
                                         map_of(Modality::voice, 0, 0), 0.1);
    CHECK(std::all_of(zero.planes.begin(), zero.planes.end(), [](auto p) { return p == 0; }));
    const auto s = fuse_feature_level(map_of(Modality::action, 2, 255), map_of(Modality::slide, 2, 0),
                                      map_of(Modality::voice, 2, 0), 0.4);
    const auto t = s.tensor<double>();
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 6; ++x) CHECK(s.value(c, y, x) == (c == 0 ? 1.0 : 0.0));
        }
    }
    CHECK(t.size() == 3 * 4 * 6);
    CHECK(s.segment_index == 2);
    CHECK(s.label == 0.4);
}

TEST_CASE("fusion rejects mismatched maps") {
    CHECK_THROWS_AS(fuse_feature_level(map_of(Modality::action, 0, 0), map_of(Modality::slide, 1, 0),
                                       map_of(Modality::voice, 0, 0), 0.0),
                    ModalityMismatch);
    CHECK_THROWS_AS(fuse_feature_level(map_of(Modality::action, 0, 0), map_of(Modality::voice, 0, 0),
                                       map_of(Modality::slide, 0, 0), 0.0),
                    ModalityMismatch);
    CHECK_THROWS_AS(fuse_feature_level(map_of(Modality::action, 0, 0), map_of(Modality::slide, 0, 0, "L2"),
                                       map_of(Modality::voice, 0, 0), 0.0),
                    ModalityMismatch);
    auto big = map_of(Modality::voice, 0, 0);
    big.image = GrayImage(5, 6, 0);
    CHECK_THROWS_AS(fuse_feature_level(map_of(Modality::action, 0, 0), map_of(Modality::slide, 0, 0), big, 0.0),
                    ShapeMismatch);
}

TEST_CASE("early stopping: patience counts epochs without strict improvement") {
    EarlyStopping es(25);
    int stopped_at = 0;
    for (int epoch = 1; epoch <= 200; ++epoch) {
        es.update(epoch, 1.0 + epoch);
        if (es.should_stop()) {
            stopped_at = epoch;
            break;
        }
    }
    CHECK(stopped_at == 26);
    CHECK(es.best_epoch() == 1);
}

TEST_CASE("training returns the best-validation weights") {
    const auto ds = fixtures::oracle_dataset(3, 2, 12, 16, 24);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 12;
    cfg.patience = 4;
    const auto result = train(tiny_spec(), refs(ds.at("L1")), refs(ds.at("L2")), cfg);
    REQUIRE(result.best_epoch >= 1);
    const auto best = std::min_element(result.log.begin(), result.log.end(),
                                       [](const auto& a, const auto& b) { return a.val_mse < b.val_mse; });
    CHECK(best->epoch == result.best_epoch);
    CHECK(mean_squared_error(result.model, refs(ds.at("L2"))) == doctest::Approx(best->val_mse).epsilon(1e-6));
}

TEST_CASE("training ignores the caller's sample order") {
    const auto ds = fixtures::oracle_dataset(5, 2, 10, 16, 24);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.max_epochs = 3;
    cfg.batch_size = 4;
    auto forward = refs(ds.at("L1"));
    auto reversed = forward;
    std::reverse(reversed.begin(), reversed.end());
    const auto a = train(tiny_spec(), forward, refs(ds.at("L2")), cfg);
    const auto b = train(tiny_spec(), reversed, refs(ds.at("L2")), cfg);
    CHECK(std::equal(a.model.parameters().begin(), a.model.parameters().end(), b.model.parameters().begin(),
                     b.model.parameters().end()));
    std::ostringstream la, lb;
    write_training_log(la, a.log);
    write_training_log(lb, b.log);
    CHECK(la.str() == lb.str());
}

TEST_CASE("empty training set is rejected") {
    CHECK_THROWS_AS(train(tiny_spec(), {}, {}, TrainConfig{}), EmptySplit);
}

TEST_CASE("checkpoint and fused store round trips") {
    const auto dir = std::filesystem::temp_directory_path() / "attn_test_store";
    std::filesystem::remove_all(dir);
    Model m(tiny_spec());
    m.init(42);
    save_checkpoint(dir / "m.ckpt", m);
    const auto back = load_checkpoint(dir / "m.ckpt");
    CHECK(back.spec() == m.spec());
    CHECK(std::equal(back.parameters().begin(), back.parameters().end(), m.parameters().begin(),
                     m.parameters().end()));

    const auto ds = fixtures::oracle_dataset(1, 1, 4, 16, 24);
    save_fused_store(dir / "f.bin", ds.at("L1"));
    const auto samples = load_fused_store(dir / "f.bin");
    REQUIRE(samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(samples[i].planes == ds.at("L1")[i].planes);
        CHECK(samples[i].label == ds.at("L1")[i].label);
        CHECK(samples[i].segment_index == ds.at("L1")[i].segment_index);
    }
    CHECK_THROWS_AS(load_checkpoint(dir / "f.bin"), InputError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("oracle labels are the mean of the action channel") {
    const auto ds = fixtures::oracle_dataset(42, 1, 95, 40, 60);
    const auto& lesson = ds.at("L1");
    bool low = false, mid = false, high = false;
    for (const auto& s : lesson) {
        double sum = 0.0;
        for (int y = 0; y < s.height; ++y) {
            for (int x = 0; x < s.width; ++x) sum += s.value(0, y, x);
        }
        CHECK(sum / (s.height * s.width) == doctest::Approx(s.label).epsilon(1e-12));
        low |= s.label < 0.2;
        mid |= s.label >= 0.2 && s.label <= 0.5;
        high |= s.label > 0.5;
    }
    CHECK((low && mid && high));
}
