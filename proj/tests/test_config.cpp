#include "attn/config.hpp"
#include "attn/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace attn;

TEST_CASE("defaults are the published values") {
    const PipelineConfig c;
    CHECK(c.labels.min_record_s == 60.0);
    CHECK(c.labels.min_total_s == 300.0);
    CHECK(c.audio.fft_size == 1024);
    CHECK(c.audio.overlap == 128);
    CHECK(c.train.batch_size == 16);
    CHECK(c.train.learning_rate == 1e-5);
    CHECK(c.train.max_epochs == 200);
    CHECK(c.train.patience == 25);
    CHECK(c.train.seed == 42);
    CHECK(c.zones.hi == 0.5);
    CHECK(c.zones.lo == 0.2);
    CHECK(c.action.lk_window == 15);
    CHECK(c.action.frame_stride == 6);
    CHECK(c.maps.height == 320);
    CHECK(c.maps.width == 480);
}

TEST_CASE("settings parse and reject bad values") {
    PipelineConfig c;
    apply_setting(c, "train.learning_rate", "1e-3");
    apply_setting(c, "model.architecture", "mini_residual");
    apply_setting(c, "model.widths", "4,8,8,16");
    apply_setting(c, "eval.mode", "sevenfold");
    apply_setting(c, "eval.smooth", "kalman");
    apply_setting(c, "action.mask", "0,52,96,12;1,2,3,4");
    CHECK(c.train.learning_rate == 1e-3);
    CHECK(c.model.architecture == nn::Architecture::mini_residual);
    CHECK(c.model.widths == std::array<int, 4>{4, 8, 8, 16});
    CHECK(c.eval.mode == eval::CvMode::sevenfold);
    CHECK(c.eval.smoother == smoothing::Smoother::kalman);
    REQUIRE(c.action.mask.size() == 2);
    CHECK(format_mask(c.action.mask) == "0,52,96,12;1,2,3,4");
    CHECK_THROWS_AS(apply_setting(c, "train.nonsense", "1"), InputError);
    CHECK_THROWS_AS(apply_setting(c, "train.batch_size", "sixteen"), InputError);
    CHECK_THROWS_AS(apply_setting(c, "model.fusion", "late"), InputError);
}

TEST_CASE("map size follows into the model input") {
    PipelineConfig c;
    apply_setting(c, "maps.height", "160");
    apply_setting(c, "maps.width", "240");
    CHECK(c.model.input_height == 160);
    CHECK(c.model.input_width == 240);
}

TEST_CASE("ini file: values apply and paths resolve against the file") {
    const auto dir = std::filesystem::temp_directory_path() / "attn_test_cfg";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "run.ini") << "[paths]\nlogs = logs\nout = /abs/out\n\n[train]\nmax_epochs = 7\n";
    PipelineConfig c;
    load_config_file(c, dir / "run.ini");
    CHECK(c.paths.logs == dir / "logs");
    CHECK(c.paths.out == "/abs/out");
    CHECK(c.train.max_epochs == 7);
    CHECK(c.paths.audio == "audio");
    std::ofstream(dir / "bad.ini") << "[train]\nunknown_key = 1\n";
    PipelineConfig d;
    CHECK_THROWS_AS(load_config_file(d, dir / "bad.ini"), InputError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config echo lists every key") {
    PipelineConfig c;
    apply_setting(c, "train.seed", "9");
    const auto j = config_to_json(c);
    CHECK(j.at("train.seed") == 9);
    CHECK(j.at("labels.min_total_s") == 300.0);
    CHECK(j.at("model.architecture") == "mini_plain");
    PipelineConfig round;
    for (const auto& [key, value] : j.items()) {
        apply_setting(round, key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    CHECK(config_to_json(round) == j);
}
