#include "attn/pipeline.hpp"

#include "attn/action_features.hpp"
#include "attn/audio_features.hpp"
#include "attn/error.hpp"
#include "attn/hash.hpp"
#include "attn/labeling.hpp"
#include "attn/layout.hpp"
#include "attn/plots.hpp"
#include "attn/slide_features.hpp"
#include "attn/wav.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace attn::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Two decimals with trailing zeros dropped: 532, 8.71, 625.86.
std::string table_number(double v) {
    auto s = fmt("%.2f", v);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json confusion_json(const eval::Confusion& c) {
    json rows = json::array();
    for (const auto& row : c) rows.push_back(json(row));
    return rows;
}

json metrics_json(const eval::RegressionMetrics& m, const eval::ClassificationResult& cls) {
    return {{"mse", m.mse},
            {"mae", m.mae},
            {"r2", optional_number(m.r2)},
            {"pcc", optional_number(m.pcc)},
            {"acc3", cls.acc3},
            {"confusion", confusion_json(cls.confusion)}};
}

json aggregate_json(const eval::AggregateMetrics& m) {
    return {{"mse", m.mse},
            {"mae", m.mae},
            {"r2", optional_number(m.r2)},
            {"pcc", optional_number(m.pcc)},
            {"acc3", m.acc3},
            {"confusion", confusion_json(m.confusion)}};
}

void write_predictions(const fs::path& path, const eval::FoldMetrics& fm, double hi, double lo) {
    const auto truth_zone = eval::discretize3(fm.truth, hi, lo);
    const auto pred_zone = eval::discretize3(fm.smoothed_predictions, hi, lo);
    auto out = open_out(path);
    out << "segment_index,truth,predicted,smoothed,truth_zone,pred_zone\n";
    char buf[160];
    for (std::size_t i = 0; i < fm.truth.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s,%s\n", i, fm.truth[i], fm.predictions[i],
                      fm.smoothed_predictions[i], eval::zone_name(truth_zone[i]), eval::zone_name(pred_zone[i]));
        out << buf;
    }
}

struct Predictions {
    std::vector<double> truth, predicted, smoothed;
};

Predictions read_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingStageArtifact("no predictions at " + path.string() + "; run `attn eval` first");
    Predictions p;
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) throw MalformedRow(line_no, "expected 6 prediction columns");
        try {
            p.truth.push_back(std::stod(cells[1]));
            p.predicted.push_back(std::stod(cells[2]));
            p.smoothed.push_back(std::stod(cells[3]));
        } catch (const std::exception&) {
            throw MalformedRow(line_no, "bad number in predictions");
        }
    }
    return p;
}

labeling::LabelSeries load_labels(const fs::path& out, const std::string& lesson) {
    const auto path = layout::label_csv(out, lesson);
    std::ifstream in(path);
    if (!in) throw MissingStageArtifact("no labels at " + path.string() + "; run `attn label` first");
    return labeling::read_label_csv(in, lesson);
}

std::vector<std::string> require_lessons(const fs::path& out) {
    auto lessons = labeled_lessons(out);
    if (lessons.empty()) {
        throw MissingStageArtifact("no label files under " + out.string() + "; run `attn label` first");
    }
    return lessons;
}

GrayImage read_feature(const fs::path& out, const std::string& lesson, Modality m, int segment) {
    const auto path = layout::feature_png(out, lesson, m, segment);
    if (!fs::exists(path)) {
        throw MissingStageArtifact("missing feature map " + path.string() + "; run `attn features` first");
    }
    return read_png_gray(path);
}

json input_hashes(const PipelineConfig& config, const std::vector<std::string>& lessons) {
    std::vector<std::pair<std::string, std::string>> entries;
    json blobs = json::object();
    for (const auto& lesson : lessons) {
        const auto sha = git_blob_sha1_file(layout::fused_store(config.paths.out, lesson));
        entries.emplace_back(lesson, sha);
        blobs[lesson] = sha;
    }
    return {{"sha1", combined_sha1(entries)}, {"blobs", blobs}};
}

}  // namespace

std::vector<fs::path> log_files(const fs::path& logs) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(logs)) {
        files.push_back(logs);
    } else if (fs::is_directory(logs)) {
        for (const auto& entry : fs::directory_iterator(logs)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no access logs (*.csv) found at " + logs.string());
    return files;
}

logs::ParseResult read_logs(const fs::path& logs) {
    logs::ParseResult all;
    for (const auto& file : log_files(logs)) {
        std::ifstream in(file);
        if (!in) throw InputError("cannot open " + file.string());
        try {
            auto part = logs::parse_playback_log(in);
            all.records.insert(all.records.end(), part.records.begin(), part.records.end());
            all.rejections.insert(all.rejections.end(), part.rejections.begin(), part.rejections.end());
        } catch (const MalformedRow& e) {
            throw MalformedRow(e.line(), file.filename().string() + ": " + e.what());
        }
    }
    return all;
}

std::vector<std::string> labeled_lessons(const fs::path& out) {
    std::vector<std::string> lessons;
    if (!fs::is_directory(out)) return lessons;
    for (const auto& entry : fs::directory_iterator(out)) {
        if (!entry.is_directory()) continue;
        const auto lesson = entry.path().filename().string();
        if (fs::exists(layout::label_csv(out, lesson))) lessons.push_back(lesson);
    }
    std::sort(lessons.begin(), lessons.end(), logs::natural_less);
    return lessons;
}

std::string format_table1(const std::vector<logs::LessonStats>& stats) {
    std::string text = "Lesson,Valid Viewers,Total Viewing Time (min)\n";
    double viewers = 0.0, minutes = 0.0;
    for (const auto& s : stats) {
        text += s.lesson_id + "," + std::to_string(s.valid_viewers) + "," + table_number(s.total_viewing_min) + "\n";
        viewers += static_cast<double>(s.valid_viewers);
        minutes += s.total_viewing_min;
    }
    if (!stats.empty()) {
        const auto n = static_cast<double>(stats.size());
        text += "Average," + table_number(viewers / n) + "," + table_number(minutes / n) + "\n";
    }
    return text;
}

void cmd_ingest(const PipelineConfig& config, std::ostream& log) {
    const auto parsed = read_logs(config.paths.logs);
    const auto valid = logs::filter_valid_records(parsed.records, config.labels.min_record_s);
    const auto viewers = logs::select_valid_viewers(valid, config.labels.min_total_s);
    std::ostringstream report;
    report << "records," << parsed.records.size() << "\n";
    report << "rejected," << parsed.rejections.size() << "\n";
    report << "records_at_least_min_record_s," << valid.size() << "\n";
    report << "valid_viewer_lesson_pairs," << viewers.size() << "\n";
    report << parsed.rejection_report();
    auto out = open_out(layout::ingest_report(config.paths.out));
    out << report.str();
    log << "ingest: " << parsed.records.size() << " records, " << parsed.rejections.size() << " rejected, "
        << viewers.size() << " valid viewer/lesson pairs\n";
}

std::vector<logs::LessonStats> cmd_label(const PipelineConfig& config, std::ostream& log) {
    const auto parsed = read_logs(config.paths.logs);
    if (parsed.records.empty()) throw InputError("access logs contain no usable records");
    const auto stats =
        logs::lesson_statistics(parsed.records, config.labels.min_record_s, config.labels.min_total_s);

    const auto valid = logs::filter_valid_records(parsed.records, config.labels.min_record_s);
    const auto viewers = logs::select_valid_viewers(valid, config.labels.min_total_s);
    const auto kept = logs::clip_records(logs::keep_viewers(valid, viewers));
    std::map<std::string, std::vector<logs::PlaybackRecord>> by_lesson;
    for (const auto& r : parsed.records) by_lesson[r.lesson_id];
    for (const auto& r : kept) by_lesson[r.lesson_id].push_back(r);

    std::vector<std::string> lessons;
    for (const auto& [id, records] : by_lesson) lessons.push_back(id);
    std::sort(lessons.begin(), lessons.end(), logs::natural_less);
    std::size_t segments = 0;
    for (const auto& id : lessons) {
        labeling::SegmentGrid grid;
        grid.lesson_id = id;
        const auto labels =
            labeling::generate_labels(by_lesson[id], grid, config.labels.min_overlap_s, config.labels.count_mode);
        auto out = open_out(layout::label_csv(config.paths.out, id));
        labeling::write_label_csv(out, labels);
        segments += labels.normalized.size();
        if (labels.degenerate) log << "label: warning: lesson " << id << " has no valid viewing\n";
    }
    auto table = open_out(layout::table1_csv(config.paths.out));
    table << format_table1(stats);
    log << format_table1(stats);
    log << "label: " << lessons.size() << " lessons, " << segments << " labeled segments\n";
    return stats;
}

void cmd_features(const PipelineConfig& config, std::ostream& log) {
    const auto& out = config.paths.out;
    const auto lessons = require_lessons(out);
    const auto action_opts = config.action_options();
    const int h = config.maps.height, w = config.maps.width;
    for (const auto& lesson : lessons) {
        const auto labels = load_labels(out, lesson);
        const int segments = static_cast<int>(labels.normalized.size());
        for (auto m : {Modality::action, Modality::slide, Modality::voice}) {
            fs::create_directories(layout::feature_dir(out, lesson, m));
        }

        const auto wav_path = config.paths.audio / (lesson + ".wav");
        if (!fs::exists(wav_path)) throw InputError("no audio for lesson " + lesson + " at " + wav_path.string());
        const auto audio = wav::read(wav_path);
        for (int i = 0; i < segments; ++i) {
            GrayImage map(h, w, 0);
            // Past the end of the recording the segment is silence, whose map is all zeros.
            const double start = 60.0 * i * audio.sample_rate_hz;
            if (start < static_cast<double>(audio.samples.size())) {
                const auto sp =
                    audio::stft(audio::segment_audio(audio, i), config.audio.fft_size, config.audio.overlap);
                map = audio::spectrogram_to_feature_map(sp, h, w);
            }
            write_png(layout::feature_png(out, lesson, Modality::voice, i), map);
        }

        const auto manifest_path = config.paths.frames / lesson / "manifest.json";
        if (!fs::exists(manifest_path)) {
            throw InputError("no frame manifest for lesson " + lesson + " at " + manifest_path.string());
        }
        const auto manifest = action::load_manifest(manifest_path);
        const auto pose_path = config.paths.pose / (lesson + ".jsonl");
        const auto poses = fs::exists(pose_path) ? action::load_pose_jsonl(pose_path)
                                                 : std::vector<action::PoseKeypoints>{};
        for (int i = 0; i < segments; ++i) {
            write_png(layout::feature_png(out, lesson, Modality::action, i),
                      action::action_map_for_segment(manifest, poses, i, action_opts));
        }

        const auto slide_path = config.paths.slides / (lesson + ".csv");
        std::ifstream slide_in(slide_path);
        if (!slide_in) throw InputError("no slide events for lesson " + lesson + " at " + slide_path.string());
        const auto progression = slides::net_progression(slides::read_slide_csv(slide_in), segments);
        const auto series = slides::expand_smooth_normalize(progression.p_raw);
        if (progression.no_events) log << "features: warning: lesson " << lesson << " has no slide events\n";
        for (int i = 0; i < segments; ++i) {
            write_png(layout::feature_png(out, lesson, Modality::slide, i),
                      slides::slide_matrix(series.p_norm[static_cast<std::size_t>(i)], h, w));
        }
        auto sidecar = open_out(layout::slide_sidecar(out, lesson));
        slides::write_slide_sidecar(sidecar, series);
        log << "features: " << lesson << ": " << segments << " segments\n";
    }
}

void cmd_fuse(const PipelineConfig& config, std::ostream& log) {
    const auto& out = config.paths.out;
    for (const auto& lesson : require_lessons(out)) {
        const auto labels = load_labels(out, lesson);
        std::vector<fusion::FusedSample> samples;
        for (std::size_t i = 0; i < labels.normalized.size(); ++i) {
            const int seg = static_cast<int>(i);
            samples.push_back(fusion::fuse_feature_level(
                {Modality::action, lesson, seg, read_feature(out, lesson, Modality::action, seg)},
                {Modality::slide, lesson, seg, read_feature(out, lesson, Modality::slide, seg)},
                {Modality::voice, lesson, seg, read_feature(out, lesson, Modality::voice, seg)},
                labels.normalized[i]));
        }
        fusion::save_fused_store(layout::fused_store(out, lesson), samples);
        log << "fuse: " << lesson << ": " << samples.size() << " samples\n";
    }
}

eval::Dataset load_dataset(const PipelineConfig& config) {
    eval::Dataset ds;
    for (const auto& lesson : require_lessons(config.paths.out)) {
        const auto path = layout::fused_store(config.paths.out, lesson);
        if (!fs::exists(path)) throw MissingStageArtifact("no fused store at " + path.string() + "; run `attn fuse` first");
        ds[lesson] = fusion::load_fused_store(path);
    }
    return ds;
}

void cmd_train(const PipelineConfig& config, bool dry_run, std::ostream& log) {
    config.model.validate();
    config.train.validate();
    if (dry_run) {
        log << config_to_json(config).dump(2) << "\n";
        log << "parameters: " << nn::parameter_count(config.model) << "\n";
        for (const auto& row : nn::layer_table(config.model)) log << row << "\n";
        return;
    }
    const auto dataset = load_dataset(config);
    const auto folds = eval::make_folds(eval::lesson_order(dataset), eval::CvMode::fixed);
    const auto& fold = folds.front();
    fusion::SampleRefs train_refs, val_refs;
    for (const auto& id : fold.train) {
        for (const auto& s : dataset.at(id)) train_refs.push_back(&s);
    }
    for (const auto& s : dataset.at(fold.val)) val_refs.push_back(&s);
    const auto result = fusion::train(config.model, train_refs, val_refs, config.train);
    const auto& out = config.paths.out;
    fusion::save_checkpoint(layout::checkpoint(out, fold.test, "fixed"), result.model);
    auto tlog = open_out(layout::train_log(out, fold.test, "fixed"));
    fusion::write_training_log(tlog, result.log);
    log << "train: " << result.log.size() << " epochs, best epoch " << result.best_epoch
        << (result.early_stopped ? " (early stop)" : "") << "\n";
}

eval::EvalReport cmd_eval(const PipelineConfig& config, std::ostream& log) {
    const auto& out = config.paths.out;
    const auto dataset = load_dataset(config);
    const auto lessons = eval::lesson_order(dataset);
    eval::CvOptions options{config.zones.hi, config.zones.lo, config.eval.smoother};
    eval::EvalReport report;
    if (config.eval.mode == eval::CvMode::fixed) {
        const auto fold = eval::make_folds(lessons, eval::CvMode::fixed).front();
        const auto ckpt = layout::checkpoint(out, fold.test, "fixed");
        if (!fs::exists(ckpt)) throw MissingStageArtifact("no checkpoint at " + ckpt.string() + "; run `attn train` first");
        const auto model = fusion::load_checkpoint(ckpt);
        if (!(model.spec() == config.model)) {
            throw InputError("checkpoint " + ckpt.string() + " was trained with a different model config; rerun `attn train`");
        }
        auto fm = eval::evaluate_lesson(model, dataset.at(fold.test), options);
        fm.test_lesson = fold.test;
        fm.val_lesson = fold.val;
        fm.train_lessons = fold.train;
        report.mode = eval::mode_name(eval::CvMode::fixed);
        report.smoother = std::string(smoothing::smoother_name(options.smoother));
        report.per_fold.push_back(std::move(fm));
        eval::aggregate(report);
    } else {
        report = eval::cross_validate(dataset, config.model, config.train, config.eval.mode, options,
                                      [&](std::size_t, const eval::Fold& fold, const fusion::TrainResult& result) {
                                          fusion::save_checkpoint(layout::checkpoint(out, fold.test, "fold"),
                                                                  result.model);
                                          auto tlog = open_out(layout::train_log(out, fold.test, "fold"));
                                          fusion::write_training_log(tlog, result.log);
                                          log << "eval: fold " << fold.test << " trained, best epoch "
                                              << result.best_epoch << "\n";
                                      });
    }
    for (const auto& fm : report.per_fold) {
        write_predictions(layout::predictions_csv(out, fm.test_lesson), fm, config.zones.hi, config.zones.lo);
    }
    auto j = report_to_json(report);
    j["config"] = config_to_json(config);
    j["inputs"] = input_hashes(config, lessons);
    auto file = open_out(layout::eval_report(out, report.mode));
    file << j.dump(2) << "\n";
    const auto show = [](const std::optional<double>& v) { return v ? fmt("%.4f", *v) : std::string("undefined"); };
    log << "eval (" << report.mode << "): raw pcc " << show(report.raw.pcc) << ", acc3 " << fmt("%.4f", report.raw.acc3)
        << "; smoothed pcc " << show(report.smoothed.pcc) << ", acc3 " << fmt("%.4f", report.smoothed.acc3) << "\n";
    return report;
}

void cmd_report(const PipelineConfig& config, std::ostream& log) {
    const auto& out = config.paths.out;
    std::size_t written = 0;
    for (const auto& lesson : labeled_lessons(out)) {
        const auto path = layout::predictions_csv(out, lesson);
        if (!fs::exists(path)) continue;
        const auto p = read_predictions(path);
        write_png(layout::heatmap_png(out, lesson),
                  plots::attention_heatmap(p.truth, p.smoothed, config.zones.hi, config.zones.lo));
        auto svg = open_out(layout::plot_svg(out, lesson));
        svg << plots::line_plot_svg(lesson, p.truth, p.predicted, p.smoothed, config.zones.hi, config.zones.lo);
        ++written;
    }
    if (written == 0) {
        throw MissingStageArtifact("no predictions under " + out.string() + "; run `attn eval` first");
    }
    log << "report: " << written << " lessons\n";
}

json report_to_json(const eval::EvalReport& report) {
    json folds = json::array();
    for (const auto& fm : report.per_fold) {
        folds.push_back({{"test", fm.test_lesson},
                         {"validation", fm.val_lesson},
                         {"train", fm.train_lessons},
                         {"best_epoch", fm.best_epoch},
                         {"raw", metrics_json(fm.raw, fm.raw_cls)},
                         {"smoothed", metrics_json(fm.smoothed, fm.smoothed_cls)}});
    }
    return {{"mode", report.mode},
            {"smoother", report.smoother},
            {"raw", aggregate_json(report.raw)},
            {"smoothed", aggregate_json(report.smoothed)},
            {"per_fold", folds}};
}

}  // namespace attn::pipeline
