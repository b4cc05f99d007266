#pragma once

#include "attn/fusion_model.hpp"
#include "attn/smoothing.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attn::eval {

struct RegressionMetrics {
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> r2;   // undefined for constant truth
    std::optional<double> pcc;  // undefined for constant truth or constant predictions
};

/// Throws LengthMismatch for unequal or empty inputs.
RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> truth);

enum class Zone { low = 0, medium = 1, high = 2 };

const char* zone_name(Zone z);

/// value > hi -> high, value < lo -> low, otherwise medium.
std::vector<Zone> discretize3(std::span<const double> values, double hi = 0.5, double lo = 0.2);

using Confusion = std::array<std::array<long, 3>, 3>;  // [truth][prediction]

struct ClassificationResult {
    double acc3 = 0.0;
    Confusion confusion{};
};

ClassificationResult classification_accuracy(std::span<const double> pred, std::span<const double> truth,
                                             double hi = 0.5, double lo = 0.2);

struct FoldMetrics {
    std::string test_lesson;
    std::string val_lesson;
    std::vector<std::string> train_lessons;
    RegressionMetrics raw;
    ClassificationResult raw_cls;
    RegressionMetrics smoothed;
    ClassificationResult smoothed_cls;
    int best_epoch = 0;
    std::vector<double> predictions;  // raw, segment order
    std::vector<double> smoothed_predictions;
    std::vector<double> truth;
};

struct AggregateMetrics {
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> r2;
    std::optional<double> pcc;
    double acc3 = 0.0;
    Confusion confusion{};  // summed over folds
};

struct EvalReport {
    std::string mode;
    AggregateMetrics raw;
    AggregateMetrics smoothed;
    std::string smoother;
    std::vector<FoldMetrics> per_fold;
};

enum class CvMode { fixed, sevenfold };

CvMode parse_mode(const std::string& s);
std::string mode_name(CvMode m);

struct Fold {
    std::vector<std::string> train;
    std::string val;
    std::string test;
};

/// `lessons` in canonical order. Fixed: first five train, sixth validates,
/// seventh tests. Sevenfold: fold k tests lesson k, validates on the cyclic
/// predecessor, trains on the remaining five.
std::vector<Fold> make_folds(const std::vector<std::string>& lessons, CvMode mode);

/// Lesson id -> its 95 samples.
using Dataset = std::map<std::string, std::vector<fusion::FusedSample>>;

struct CvOptions {
    double hi = 0.5;
    double lo = 0.2;
    smoothing::Smoother smoother = smoothing::Smoother::moving_average;
};

/// Metrics of one held-out lesson from an already trained model.
FoldMetrics evaluate_lesson(const fusion::Model& model, const std::vector<fusion::FusedSample>& lesson,
                            const CvOptions& options);

/// Unweighted mean over folds; undefined r2/pcc folds are skipped.
void aggregate(EvalReport& report);

/// Trains one model per fold and evaluates its test lesson. `on_fold` (if
/// set) sees each trained fold model, e.g. to persist checkpoints.
EvalReport cross_validate(const Dataset& dataset, const nn::ModelSpec& spec, const fusion::TrainConfig& config,
                          CvMode mode, const CvOptions& options = {},
                          const std::function<void(std::size_t, const Fold&, const fusion::TrainResult&)>& on_fold = {});

std::vector<std::string> lesson_order(const Dataset& dataset);

}  // namespace attn::eval
