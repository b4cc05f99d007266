#include "attn/config.hpp"
#include "attn/error.hpp"
#include "attn/fixtures.hpp"
#include "attn/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> settings;
    std::string out;
};

attn::PipelineConfig resolve(const CommonOptions& common, const std::vector<std::pair<std::string, std::string>>& extra) {
    attn::PipelineConfig config;
    if (!common.config_path.empty()) attn::load_config_file(config, common.config_path);
    for (const auto& kv : common.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw attn::InputError("--set expects key=value, got '" + kv + "'");
        attn::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : extra) attn::apply_setting(config, key, value);
    if (!common.out.empty()) attn::apply_setting(config, "paths.out", common.out);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lecture-segment attention prediction from playback logs, video, audio and slides"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string smooth, mode, kind = "oracle", fixture_dir = ".";
    std::uint64_t seed = 42;
    bool dry_run = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "INI config file")->check(CLI::ExistingFile);
        sub->add_option("--set", common.settings, "Override a config key (section.key=value); repeatable");
        sub->add_option("-o,--out", common.out, "Output root (overrides paths.out)");
    };

    auto* ingest = app.add_subcommand("ingest", "Parse access logs and write a rejection report");
    auto* label = app.add_subcommand("label", "Per-segment attention labels and the viewer statistics table");
    auto* features = app.add_subcommand("features", "Action, slide and voice maps per segment");
    auto* fuse = app.add_subcommand("fuse", "Stack modality maps into fused tensor stores");
    auto* train = app.add_subcommand("train", "Train on the fixed lesson split");
    auto* eval = app.add_subcommand("eval", "Evaluate (fixed checkpoint or sevenfold cross-validation)");
    auto* report = app.add_subcommand("report", "Attention heatmaps and prediction plots");
    auto* fixtures = app.add_subcommand("fixtures", "Write a synthetic dataset");
    for (auto* sub : {ingest, label, features, fuse, train, eval, report}) add_common(sub);
    train->add_flag("--dry-run", dry_run, "Print resolved config and model size only");
    for (auto* sub : {eval, report}) {
        sub->add_option("--smooth", smooth, "Prediction smoother")->check(CLI::IsMember({"ma", "sg", "kalman", "none"}));
    }
    eval->add_option("--mode", mode, "Cross-validation mode")->check(CLI::IsMember({"fixed", "sevenfold"}));
    fixtures->add_option("kind", kind, "table1 | oracle | tiny | raw")
        ->check(CLI::IsMember({"table1", "oracle", "tiny", "raw"}));
    fixtures->add_option("-d,--dir", fixture_dir, "Destination directory");
    fixtures->add_option("--seed", seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::pair<std::string, std::string>> extra;
        if (!smooth.empty()) extra.emplace_back("eval.smooth", smooth);
        if (!mode.empty()) extra.emplace_back("eval.mode", mode);

        if (fixtures->parsed()) {
            attn::fixtures::write_fixture(kind, fixture_dir, seed);
            std::cout << "fixtures: wrote " << kind << " to " << fixture_dir << "\n";
            return 0;
        }
        const auto config = resolve(common, extra);
        if (ingest->parsed()) attn::pipeline::cmd_ingest(config, std::cout);
        else if (label->parsed()) attn::pipeline::cmd_label(config, std::cout);
        else if (features->parsed()) attn::pipeline::cmd_features(config, std::cout);
        else if (fuse->parsed()) attn::pipeline::cmd_fuse(config, std::cout);
        else if (train->parsed()) attn::pipeline::cmd_train(config, dry_run, std::cout);
        else if (eval->parsed()) attn::pipeline::cmd_eval(config, std::cout);
        else if (report->parsed()) attn::pipeline::cmd_report(config, std::cout);
        return 0;
    } catch (const attn::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
