#include "attn/evaluation.hpp"

#include "attn/error.hpp"
#include "attn/log_ingest.hpp"

#include <algorithm>
#include <cmath>

namespace attn::eval {

RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("prediction and truth lengths differ");
    if (pred.empty()) throw LengthMismatch("metrics need at least one value");
    const double n = static_cast<double>(pred.size());
    RegressionMetrics m;
    double mean_p = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        m.mse += e * e;
        m.mae += std::abs(e);
        mean_p += pred[i];
        mean_t += truth[i];
    }
    m.mse /= n;
    m.mae /= n;
    mean_p /= n;
    mean_t /= n;
    double ss_tot = 0.0, ss_p = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dt = truth[i] - mean_t, dp = pred[i] - mean_p;
        ss_tot += dt * dt;
        ss_p += dp * dp;
        cov += dt * dp;
    }
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - (m.mse * n) / ss_tot;
        if (ss_p > 0.0) m.pcc = std::clamp(cov / std::sqrt(ss_tot * ss_p), -1.0, 1.0);
    }
    return m;
}

const char* zone_name(Zone z) {
    switch (z) {
        case Zone::low: return "low";
        case Zone::medium: return "medium";
        case Zone::high: return "high";
    }
    return "medium";
}

std::vector<Zone> discretize3(std::span<const double> values, double hi, double lo) {
    if (!(lo < hi)) throw Error("zone thresholds need lo < hi");
    std::vector<Zone> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(v > hi ? Zone::high : (v < lo ? Zone::low : Zone::medium));
    return out;
}

ClassificationResult classification_accuracy(std::span<const double> pred, std::span<const double> truth, double hi,
                                             double lo) {
    if (pred.size() != truth.size()) throw LengthMismatch("prediction and truth lengths differ");
    const auto zp = discretize3(pred, hi, lo);
    const auto zt = discretize3(truth, hi, lo);
    ClassificationResult r;
    long hits = 0;
    for (std::size_t i = 0; i < zp.size(); ++i) {
        r.confusion[static_cast<int>(zt[i])][static_cast<int>(zp[i])] += 1;
        hits += zp[i] == zt[i];
    }
    r.acc3 = zp.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(zp.size());
    return r;
}

CvMode parse_mode(const std::string& s) {
    if (s == "fixed") return CvMode::fixed;
    if (s == "sevenfold") return CvMode::sevenfold;
    throw InputError("unknown evaluation mode '" + s + "' (expected fixed|sevenfold)");
}

std::string mode_name(CvMode m) { return m == CvMode::fixed ? "fixed" : "sevenfold"; }

std::vector<Fold> make_folds(const std::vector<std::string>& lessons, CvMode mode) {
    if (lessons.size() != 7) {
        throw MissingLesson("evaluation needs exactly 7 lessons, found " + std::to_string(lessons.size()));
    }
    std::vector<Fold> folds;
    if (mode == CvMode::fixed) {
        folds.push_back({{lessons.begin(), lessons.begin() + 5}, lessons[5], lessons[6]});
        return folds;
    }
    for (std::size_t k = 0; k < lessons.size(); ++k) {
        Fold f;
        f.test = lessons[k];
        const std::size_t v = (k + lessons.size() - 1) % lessons.size();
        f.val = lessons[v];
        for (std::size_t i = 0; i < lessons.size(); ++i) {
            if (i != k && i != v) f.train.push_back(lessons[i]);
        }
        folds.push_back(std::move(f));
    }
    return folds;
}

std::vector<std::string> lesson_order(const Dataset& dataset) {
    std::vector<std::string> out;
    for (const auto& [id, samples] : dataset) out.push_back(id);
    std::sort(out.begin(), out.end(), logs::natural_less);
    return out;
}

FoldMetrics evaluate_lesson(const fusion::Model& model, const std::vector<fusion::FusedSample>& lesson,
                            const CvOptions& options) {
    fusion::SampleRefs refs;
    for (const auto& s : lesson) refs.push_back(&s);
    fusion::canonical_sort(refs);
    FoldMetrics fm;
    if (!refs.empty()) fm.test_lesson = refs.front()->lesson_id;
    for (const auto* s : refs) fm.truth.push_back(s->label);
    fm.predictions = fusion::predict(model, refs);
    fm.smoothed_predictions = smoothing::apply(options.smoother, fm.predictions);
    fm.raw = regression_metrics(fm.predictions, fm.truth);
    fm.raw_cls = classification_accuracy(fm.predictions, fm.truth, options.hi, options.lo);
    fm.smoothed = regression_metrics(fm.smoothed_predictions, fm.truth);
    fm.smoothed_cls = classification_accuracy(fm.smoothed_predictions, fm.truth, options.hi, options.lo);
    return fm;
}

namespace {

AggregateMetrics mean_of(const std::vector<FoldMetrics>& folds, bool smoothed) {
    AggregateMetrics a;
    double r2_sum = 0.0, pcc_sum = 0.0;
    int r2_n = 0, pcc_n = 0;
    for (const auto& f : folds) {
        const auto& m = smoothed ? f.smoothed : f.raw;
        const auto& c = smoothed ? f.smoothed_cls : f.raw_cls;
        a.mse += m.mse;
        a.mae += m.mae;
        a.acc3 += c.acc3;
        if (m.r2) {
            r2_sum += *m.r2;
            ++r2_n;
        }
        if (m.pcc) {
            pcc_sum += *m.pcc;
            ++pcc_n;
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) a.confusion[i][j] += c.confusion[i][j];
        }
    }
    const double n = folds.empty() ? 1.0 : static_cast<double>(folds.size());
    a.mse /= n;
    a.mae /= n;
    a.acc3 /= n;
    if (r2_n > 0) a.r2 = r2_sum / r2_n;
    if (pcc_n > 0) a.pcc = pcc_sum / pcc_n;
    return a;
}

}  // namespace

void aggregate(EvalReport& report) {
    report.raw = mean_of(report.per_fold, false);
    report.smoothed = mean_of(report.per_fold, true);
}

EvalReport cross_validate(const Dataset& dataset, const nn::ModelSpec& spec, const fusion::TrainConfig& config,
                          CvMode mode, const CvOptions& options,
                          const std::function<void(std::size_t, const Fold&, const fusion::TrainResult&)>& on_fold) {
    const auto lessons = lesson_order(dataset);
    const auto folds = make_folds(lessons, mode);
    EvalReport report;
    report.mode = mode_name(mode);
    report.smoother = std::string(smoothing::smoother_name(options.smoother));
    const auto refs_of = [&](const std::string& id) {
        fusion::SampleRefs refs;
        for (const auto& s : dataset.at(id)) refs.push_back(&s);
        return refs;
    };
    for (std::size_t k = 0; k < folds.size(); ++k) {
        const auto& fold = folds[k];
        fusion::SampleRefs train_refs;
        for (const auto& id : fold.train) {
            const auto r = refs_of(id);
            train_refs.insert(train_refs.end(), r.begin(), r.end());
        }
        const auto result = fusion::train(spec, train_refs, refs_of(fold.val), config);
        if (on_fold) on_fold(k, fold, result);
        auto fm = evaluate_lesson(result.model, dataset.at(fold.test), options);
        fm.test_lesson = fold.test;
        fm.val_lesson = fold.val;
        fm.train_lessons = fold.train;
        fm.best_epoch = result.best_epoch;
        report.per_fold.push_back(std::move(fm));
    }
    aggregate(report);
    return report;
}

}  // namespace attn::eval
