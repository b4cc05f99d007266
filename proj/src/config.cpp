#include "attn/config.hpp"

#include "attn/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <sstream>

namespace attn {
namespace {

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw InputError("setting " + key + ": not a number: " + v);
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw InputError("setting " + key + ": not an integer: " + v);
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

action::MaskSpec parse_mask(const std::string& text) {
    action::MaskSpec mask;
    for (const auto& rect : split(text, ';')) {
        if (rect.empty()) continue;
        const auto parts = split(rect, ',');
        if (parts.size() != 4) throw InputError("mask rectangle must be x,y,w,h: " + rect);
        mask.push_back({to_int("action.mask", parts[0]), to_int("action.mask", parts[1]),
                        to_int("action.mask", parts[2]), to_int("action.mask", parts[3])});
    }
    return mask;
}

std::string format_mask(const action::MaskSpec& mask) {
    std::string out;
    for (const auto& r : mask) {
        if (!out.empty()) out += ';';
        out += std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.w) + "," + std::to_string(r.h);
    }
    return out;
}

void PipelineConfig::resolve_paths(const std::filesystem::path& base) {
    for (auto* p : {&paths.logs, &paths.audio, &paths.frames, &paths.pose, &paths.slides, &paths.out}) {
        if (p->is_relative()) *p = base / *p;
    }
}

action::ActionOptions PipelineConfig::action_options() const {
    action::ActionOptions o;
    o.frame_stride = action.frame_stride;
    o.mask = action.mask;
    o.seeds.min_confidence = action.min_confidence;
    o.seeds.max_points = action.max_points;
    o.seeds.mode = action.seed_mode;
    o.lk.window = action.lk_window;
    o.lk.max_iters = action.lk_max_iters;
    o.lk.eps = action.lk_eps;
    o.map_height = maps.height;
    o.map_width = maps.width;
    return o;
}

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
    const auto d = [&] { return to_double(key, value); };
    const auto i = [&] { return to_int(key, value); };
    if (key == "paths.logs") c.paths.logs = value;
    else if (key == "paths.audio") c.paths.audio = value;
    else if (key == "paths.frames") c.paths.frames = value;
    else if (key == "paths.pose") c.paths.pose = value;
    else if (key == "paths.slides") c.paths.slides = value;
    else if (key == "paths.out") c.paths.out = value;
    else if (key == "labels.min_record_s") c.labels.min_record_s = d();
    else if (key == "labels.min_total_s") c.labels.min_total_s = d();
    else if (key == "labels.min_overlap_s") c.labels.min_overlap_s = d();
    else if (key == "labels.count_mode") {
        if (value == "events") c.labels.count_mode = labeling::CountMode::access_events;
        else if (value == "viewers") c.labels.count_mode = labeling::CountMode::distinct_viewers;
        else throw InputError("labels.count_mode must be events|viewers");
    } else if (key == "zones.hi") c.zones.hi = d();
    else if (key == "zones.lo") c.zones.lo = d();
    else if (key == "audio.fft_size") c.audio.fft_size = i();
    else if (key == "audio.overlap") c.audio.overlap = i();
    else if (key == "action.frame_stride") c.action.frame_stride = i();
    else if (key == "action.lk_window") c.action.lk_window = i();
    else if (key == "action.lk_max_iters") c.action.lk_max_iters = i();
    else if (key == "action.lk_eps") c.action.lk_eps = d();
    else if (key == "action.min_confidence") c.action.min_confidence = d();
    else if (key == "action.max_points") c.action.max_points = i();
    else if (key == "action.seed_mode") {
        if (value == "pose_or_corners") c.action.seed_mode = action::SeedMode::pose_or_corners;
        else if (value == "pose_and_corners") c.action.seed_mode = action::SeedMode::pose_and_corners;
        else throw InputError("action.seed_mode must be pose_or_corners|pose_and_corners");
    } else if (key == "action.mask") c.action.mask = parse_mask(value);
    else if (key == "maps.height") c.maps.height = i();
    else if (key == "maps.width") c.maps.width = i();
    else if (key == "train.learning_rate") c.train.learning_rate = d();
    else if (key == "train.batch_size") c.train.batch_size = i();
    else if (key == "train.max_epochs") c.train.max_epochs = i();
    else if (key == "train.patience") c.train.patience = i();
    else if (key == "train.seed") c.train.seed = static_cast<std::uint64_t>(to_double(key, value));
    else if (key == "model.architecture") c.model.architecture = nn::parse_architecture(value);
    else if (key == "model.fusion") c.model.fusion = nn::parse_fusion(value);
    else if (key == "model.input_pool") c.model.input_pool = i();
    else if (key == "model.dense") c.model.dense = i();
    else if (key == "model.widths") {
        const auto parts = split(value, ',');
        if (parts.size() != 4) throw InputError("model.widths needs four comma-separated values");
        for (int k = 0; k < 4; ++k) c.model.widths[k] = to_int(key, parts[k]);
    } else if (key == "eval.mode") c.eval.mode = eval::parse_mode(value);
    else if (key == "eval.smooth") c.eval.smoother = smoothing::parse_smoother(value);
    else throw InputError("unknown setting '" + key + "'");
    c.model.input_height = c.maps.height;
    c.model.input_width = c.maps.width;
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("cannot read config: ") + e.what());
    }
    const auto base = path.parent_path();
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw InputError("config key '" + section + "' is outside any [section]");
        for (const auto& [key, value] : body) {
            std::string text = value.data();
            // Paths given in a file are relative to that file.
            if (section == "paths" && std::filesystem::path(text).is_relative()) text = (base / text).string();
            apply_setting(config, section + "." + key, text);
        }
    }
}

nlohmann::json config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["paths.logs"] = c.paths.logs.string();
    j["paths.audio"] = c.paths.audio.string();
    j["paths.frames"] = c.paths.frames.string();
    j["paths.pose"] = c.paths.pose.string();
    j["paths.slides"] = c.paths.slides.string();
    j["paths.out"] = c.paths.out.string();
    j["labels.min_record_s"] = c.labels.min_record_s;
    j["labels.min_total_s"] = c.labels.min_total_s;
    j["labels.min_overlap_s"] = c.labels.min_overlap_s;
    j["labels.count_mode"] = c.labels.count_mode == labeling::CountMode::access_events ? "events" : "viewers";
    j["zones.hi"] = c.zones.hi;
    j["zones.lo"] = c.zones.lo;
    j["audio.fft_size"] = c.audio.fft_size;
    j["audio.overlap"] = c.audio.overlap;
    j["action.frame_stride"] = c.action.frame_stride;
    j["action.lk_window"] = c.action.lk_window;
    j["action.lk_max_iters"] = c.action.lk_max_iters;
    j["action.lk_eps"] = c.action.lk_eps;
    j["action.min_confidence"] = c.action.min_confidence;
    j["action.max_points"] = c.action.max_points;
    j["action.seed_mode"] =
        c.action.seed_mode == action::SeedMode::pose_or_corners ? "pose_or_corners" : "pose_and_corners";
    j["action.mask"] = format_mask(c.action.mask);
    j["maps.height"] = c.maps.height;
    j["maps.width"] = c.maps.width;
    j["train.learning_rate"] = c.train.learning_rate;
    j["train.batch_size"] = c.train.batch_size;
    j["train.max_epochs"] = c.train.max_epochs;
    j["train.patience"] = c.train.patience;
    j["train.seed"] = c.train.seed;
    j["model.architecture"] = nn::architecture_name(c.model.architecture);
    j["model.fusion"] = nn::fusion_name(c.model.fusion);
    j["model.input_pool"] = c.model.input_pool;
    j["model.dense"] = c.model.dense;
    j["model.widths"] = std::to_string(c.model.widths[0]) + "," + std::to_string(c.model.widths[1]) + "," +
                        std::to_string(c.model.widths[2]) + "," + std::to_string(c.model.widths[3]);
    j["eval.mode"] = eval::mode_name(c.eval.mode);
    j["eval.smooth"] = std::string(smoothing::smoother_name(c.eval.smoother));
    return j;
}

}  // namespace attn
