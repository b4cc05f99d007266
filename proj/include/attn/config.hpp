#pragma once

#include "attn/action_features.hpp"
#include "attn/evaluation.hpp"
#include "attn/fusion_model.hpp"
#include "attn/labeling.hpp"
#include "attn/network.hpp"
#include "attn/smoothing.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace attn {

/// Every knob of a pipeline run. Defaults are the published values where one
/// exists.
struct PipelineConfig {
    struct Paths {
        std::filesystem::path logs = "logs";
        std::filesystem::path audio = "audio";
        std::filesystem::path frames = "frames";
        std::filesystem::path pose = "pose";
        std::filesystem::path slides = "slides";
        std::filesystem::path out = "out";
    } paths;

    struct Labels {
        double min_record_s = 60.0;
        double min_total_s = 300.0;
        double min_overlap_s = 1.0;
        labeling::CountMode count_mode = labeling::CountMode::access_events;
    } labels;

    struct Zones {
        double hi = 0.5;
        double lo = 0.2;
    } zones;

    struct Audio {
        int fft_size = 1024;
        int overlap = 128;
    } audio;

    struct Action {
        int frame_stride = 6;
        int lk_window = 15;
        int lk_max_iters = 10;
        double lk_eps = 0.01;
        double min_confidence = 0.3;
        int max_points = 50;
        action::SeedMode seed_mode = action::SeedMode::pose_or_corners;
        action::MaskSpec mask;
    } action;

    struct Maps {
        int height = kMapHeight;
        int width = kMapWidth;
    } maps;

    fusion::TrainConfig train;
    nn::ModelSpec model;

    struct Eval {
        eval::CvMode mode = eval::CvMode::fixed;
        smoothing::Smoother smoother = smoothing::Smoother::moving_average;
    } eval;

    /// Resolves relative paths against `base`.
    void resolve_paths(const std::filesystem::path& base);
    action::ActionOptions action_options() const;
};

/// Applies `section.key = value`; throws InputError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// INI file with [section] headers; keys as in apply_setting. Relative paths
/// resolve against the file's directory.
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Resolved configuration in `section.key` form, for report echoes.
nlohmann::json config_to_json(const PipelineConfig& config);

action::MaskSpec parse_mask(const std::string& text);
std::string format_mask(const action::MaskSpec& mask);

}  // namespace attn
