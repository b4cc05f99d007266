#pragma once

#include "attn/config.hpp"
#include "attn/evaluation.hpp"
#include "attn/log_ingest.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

// Stage commands behind the CLI. Each reads the artifacts of the previous
// stage from config.paths.out and throws MissingStageArtifact when they are
// absent.
namespace attn::pipeline {

/// All `*.csv` files under the log path (or the path itself), in name order.
/// Throws InputError if there are none.
std::vector<std::filesystem::path> log_files(const std::filesystem::path& logs);
logs::ParseResult read_logs(const std::filesystem::path& logs);

/// Lessons with a label file under `out`, in natural order.
std::vector<std::string> labeled_lessons(const std::filesystem::path& out);

/// `Lesson,Valid Viewers,Total Viewing Time (min)` plus an Average row.
std::string format_table1(const std::vector<logs::LessonStats>& stats);

void cmd_ingest(const PipelineConfig& config, std::ostream& log);
std::vector<logs::LessonStats> cmd_label(const PipelineConfig& config, std::ostream& log);
void cmd_features(const PipelineConfig& config, std::ostream& log);
void cmd_fuse(const PipelineConfig& config, std::ostream& log);
/// Fixed split training; with `dry_run` prints the resolved config and model
/// size and writes nothing.
void cmd_train(const PipelineConfig& config, bool dry_run, std::ostream& log);
eval::EvalReport cmd_eval(const PipelineConfig& config, std::ostream& log);
void cmd_report(const PipelineConfig& config, std::ostream& log);

/// Fused stores of every labeled lesson.
eval::Dataset load_dataset(const PipelineConfig& config);

nlohmann::json report_to_json(const eval::EvalReport& report);

}  // namespace attn::pipeline
