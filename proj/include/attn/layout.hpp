#pragma once

#include "attn/image.hpp"

#include <filesystem>
#include <string>

// Output tree: out/<lesson>/{labels,features/{action,voice,slide},fused,checkpoints,reports}
// plus run-wide files (table1.csv, eval_<mode>.json, ingest_report.txt) at out/.
namespace attn::layout {

namespace fs = std::filesystem;

inline fs::path lesson_dir(const fs::path& out, const std::string& lesson) { return out / lesson; }

inline fs::path label_csv(const fs::path& out, const std::string& lesson) {
    return out / lesson / "labels" / ("labels_" + lesson + ".csv");
}

inline fs::path feature_dir(const fs::path& out, const std::string& lesson, Modality m) {
    return out / lesson / "features" / modality_name(m);
}

inline fs::path feature_png(const fs::path& out, const std::string& lesson, Modality m, int segment) {
    return feature_dir(out, lesson, m) / (modality_name(m) + "_" + lesson + "_" + std::to_string(segment) + ".png");
}

inline fs::path slide_sidecar(const fs::path& out, const std::string& lesson) {
    return feature_dir(out, lesson, Modality::slide) / ("slide_" + lesson + ".csv");
}

inline fs::path fused_store(const fs::path& out, const std::string& lesson) {
    return out / lesson / "fused" / ("fused_" + lesson + ".bin");
}

inline fs::path checkpoint(const fs::path& out, const std::string& lesson, const std::string& tag) {
    return out / lesson / "checkpoints" / ("model_" + tag + ".ckpt");
}

inline fs::path train_log(const fs::path& out, const std::string& lesson, const std::string& tag) {
    return out / lesson / "checkpoints" / ("train_log_" + tag + ".csv");
}

inline fs::path predictions_csv(const fs::path& out, const std::string& lesson) {
    return out / lesson / "reports" / ("predictions_" + lesson + ".csv");
}

inline fs::path heatmap_png(const fs::path& out, const std::string& lesson) {
    return out / lesson / "reports" / ("heatmap_" + lesson + ".png");
}

inline fs::path plot_svg(const fs::path& out, const std::string& lesson) {
    return out / lesson / "reports" / ("plot_" + lesson + ".svg");
}

inline fs::path eval_report(const fs::path& out, const std::string& mode) { return out / ("eval_" + mode + ".json"); }
inline fs::path table1_csv(const fs::path& out) { return out / "table1.csv"; }
inline fs::path ingest_report(const fs::path& out) { return out / "ingest_report.txt"; }

}  // namespace attn::layout
