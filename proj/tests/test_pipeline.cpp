#include "attn/error.hpp"
#include "attn/fixtures.hpp"
#include "attn/fusion_model.hpp"
#include "attn/labeling.hpp"
#include "attn/layout.hpp"
#include "attn/pipeline.hpp"
#include "attn/plots.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace attn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Seven small lessons of 16 x 24 maps written in the stage layout.
PipelineConfig small_map_run(const fs::path& dir) {
    PipelineConfig c;
    apply_setting(c, "paths.out", (dir / "out").string());
    apply_setting(c, "maps.height", "16");
    apply_setting(c, "maps.width", "24");
    apply_setting(c, "model.input_pool", "1");
    apply_setting(c, "model.widths", "3,4,4,5");
    apply_setting(c, "model.dense", "6");
    apply_setting(c, "train.max_epochs", "3");
    apply_setting(c, "train.learning_rate", "1e-3");
    for (int l = 0; l < 7; ++l) {
        const std::string lesson = "L" + std::to_string(l + 1);
        const auto segs = fixtures::oracle_lesson(11, l, 12, 16, 24);
        std::vector<std::int64_t> counts;
        for (std::size_t i = 0; i < segs.size(); ++i) counts.push_back(static_cast<std::int64_t>(i % 4));
        auto labels = labeling::labels_from_counts(lesson, counts);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            labels.normalized[i] = segs[i].label;
            const int seg = static_cast<int>(i);
            for (auto [m, img] : {std::pair{Modality::action, &segs[i].action}, std::pair{Modality::slide, &segs[i].slide},
                                  std::pair{Modality::voice, &segs[i].voice}}) {
                fs::create_directories(layout::feature_dir(c.paths.out, lesson, m));
                write_png(layout::feature_png(c.paths.out, lesson, m, seg), *img);
            }
        }
        fs::create_directories(layout::label_csv(c.paths.out, lesson).parent_path());
        std::ofstream out(layout::label_csv(c.paths.out, lesson));
        labeling::write_label_csv(out, labels);
    }
    return c;
}

}  // namespace

TEST_CASE("label stage reproduces the statistics table and is idempotent") {
    const auto dir = fresh_dir("attn_test_label");
    fixtures::write_table1_fixture(dir);
    PipelineConfig c;
    load_config_file(c, dir / "attn.ini");
    std::ostringstream log;
    const auto stats = pipeline::cmd_label(c, log);
    const auto table = slurp(layout::table1_csv(c.paths.out));
    CHECK(table ==
          "Lesson,Valid Viewers,Total Viewing Time (min)\n"
          "Lesson-1,10,532\nLesson-2,6,605\nLesson-3,11,647\nLesson-4,8,408\nLesson-5,8,607\nLesson-6,9,643\n"
          "Lesson-7,9,939\nAverage,8.71,625.86\n");
    const auto labels_before = slurp(layout::label_csv(c.paths.out, "Lesson-3"));
    pipeline::cmd_label(c, log);
    CHECK(slurp(layout::table1_csv(c.paths.out)) == table);
    CHECK(slurp(layout::label_csv(c.paths.out, "Lesson-3")) == labels_before);
    CHECK(pipeline::labeled_lessons(c.paths.out).size() == 7);
    fs::remove_all(dir);
}

TEST_CASE("empty log directory is an input error") {
    const auto dir = fresh_dir("attn_test_nologs");
    fs::create_directories(dir / "logs");
    PipelineConfig c;
    c.paths.logs = dir / "logs";
    c.paths.out = dir / "out";
    std::ostringstream log;
    CHECK_THROWS_AS(pipeline::cmd_label(c, log), InputError);
    fs::remove_all(dir);
}

TEST_CASE("later stages name the command to run first") {
    const auto dir = fresh_dir("attn_test_missing");
    PipelineConfig c;
    c.paths.out = dir / "out";
    std::ostringstream log;
    const std::vector<std::function<void()>> stages{
        [&] { pipeline::cmd_features(c, log); }, [&] { pipeline::cmd_fuse(c, log); },
        [&] { pipeline::cmd_eval(c, log); }, [&] { pipeline::cmd_report(c, log); }};
    for (const auto& stage : stages) {
        try {
            stage();
            FAIL("expected MissingStageArtifact");
        } catch (const MissingStageArtifact& e) {
            CHECK(std::string(e.what()).find("run `attn") != std::string::npos);
        }
    }
    CHECK_THROWS_AS(pipeline::cmd_train(c, false, log), MissingStageArtifact);
    fs::remove_all(dir);
}

TEST_CASE("train dry run prints the model and writes nothing") {
    const auto dir = fresh_dir("attn_test_dry");
    PipelineConfig c;
    c.paths.out = dir / "out";
    std::ostringstream log;
    pipeline::cmd_train(c, true, log);
    CHECK(log.str().find("parameters: 28753") != std::string::npos);
    CHECK(log.str().find("\"train.learning_rate\"") != std::string::npos);
    CHECK_FALSE(fs::exists(c.paths.out));
    fs::remove_all(dir);
}

TEST_CASE("tiny fixture fuses to exactly ten samples") {
    const auto dir = fresh_dir("attn_test_tiny");
    fixtures::write_tiny_fixture(dir);
    PipelineConfig c;
    load_config_file(c, dir / "attn.ini");
    std::ostringstream log;
    pipeline::cmd_fuse(c, log);
    CHECK(fusion::load_fused_store(layout::fused_store(c.paths.out, "T1")).size() == 10);
    fs::remove_all(dir);
}

TEST_CASE("stages run end to end on small maps") {
    const auto dir = fresh_dir("attn_test_e2e");
    auto c = small_map_run(dir);
    std::ostringstream log;
    pipeline::cmd_fuse(c, log);
    pipeline::cmd_train(c, false, log);
    CHECK(fs::exists(layout::checkpoint(c.paths.out, "L7", "fixed")));
    CHECK(fs::exists(layout::train_log(c.paths.out, "L7", "fixed")));

    const auto fixed = pipeline::cmd_eval(c, log);
    CHECK(fixed.per_fold.size() == 1);
    CHECK(fixed.per_fold[0].test_lesson == "L7");
    const auto report = nlohmann::json::parse(slurp(layout::eval_report(c.paths.out, "fixed")));
    CHECK(report.at("config") == config_to_json(c));
    CHECK(report.at("inputs").at("blobs").size() == 7);
    CHECK(report.at("inputs").at("sha1").get<std::string>().size() == 40);
    CHECK(report.at("raw").contains("pcc"));
    CHECK(report.at("smoothed").contains("acc3"));

    apply_setting(c, "eval.mode", "sevenfold");
    const auto seven = pipeline::cmd_eval(c, log);
    CHECK(seven.per_fold.size() == 7);
    std::size_t covered = 0;
    for (const auto& fm : seven.per_fold) covered += fm.truth.size();
    CHECK(covered == 7 * 12);

    pipeline::cmd_report(c, log);
    for (int l = 1; l <= 7; ++l) {
        const auto lesson = "L" + std::to_string(l);
        const auto png = read_png_gray(layout::heatmap_png(c.paths.out, lesson));
        CHECK(png.width == 12 * 8);
        CHECK(fs::exists(layout::plot_svg(c.paths.out, lesson)));
    }

    apply_setting(c, "model.dense", "7");
    apply_setting(c, "eval.mode", "fixed");
    CHECK_THROWS_AS(pipeline::cmd_eval(c, log), InputError);
    fs::remove_all(dir);
}

TEST_CASE("raw fixture runs through labels, features and fusion") {
    const auto dir = fresh_dir("attn_test_raw");
    fixtures::write_raw_fixture(dir);
    PipelineConfig c;
    load_config_file(c, dir / "attn.ini");
    apply_setting(c, "maps.height", "64");
    apply_setting(c, "maps.width", "96");
    std::ostringstream log;
    pipeline::cmd_ingest(c, log);
    pipeline::cmd_label(c, log);
    pipeline::cmd_features(c, log);
    pipeline::cmd_fuse(c, log);
    for (const auto* lesson : {"R1", "R2"}) {
        const auto samples = fusion::load_fused_store(layout::fused_store(c.paths.out, lesson));
        REQUIRE(samples.size() == 95);
        const auto action = read_png_gray(layout::feature_png(c.paths.out, lesson, Modality::action, 0));
        const auto voice = read_png_gray(layout::feature_png(c.paths.out, lesson, Modality::voice, 0));
        const auto silent = read_png_gray(layout::feature_png(c.paths.out, lesson, Modality::voice, 50));
        CHECK(action.height == 64);
        int lit = 0;
        for (auto p : action.pixels) lit += p >= 64;
        CHECK(lit > 0);
        for (auto p : action.pixels) CHECK((p == 0 || p >= 64));
        int loud = 0;
        for (auto p : voice.pixels) loud += p > 0;
        CHECK(loud > 0);
        for (auto p : silent.pixels) CHECK(p == 0);
        CHECK(fs::exists(layout::slide_sidecar(c.paths.out, lesson)));
    }
    fs::remove_all(dir);
}

TEST_CASE("zone strip colours cells by zone") {
    std::vector<double> v(47, 0.1);
    v.insert(v.end(), 48, 0.7);
    const auto strip = plots::zone_strip(v);
    CHECK(strip.width == 95 * 8);
    const auto colour_at = [&](int cell) {
        const auto* p = &strip.pixels[(static_cast<std::size_t>(strip.height / 2) * strip.width + cell * 8 + 4) * 3];
        return plots::Color{p[0], p[1], p[2]};
    };
    for (int i = 0; i < 47; ++i) CHECK(colour_at(i) == plots::kLowColor);
    for (int i = 47; i < 95; ++i) CHECK(colour_at(i) == plots::kHighColor);
}
