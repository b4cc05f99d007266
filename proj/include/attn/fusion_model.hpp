#pragma once

#include "attn/image.hpp"
#include "attn/network.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace attn::fusion {

/// Channel order R = action, G = slide, B = voice; values are intensity / 255.
struct FusedSample {
    std::string lesson_id;
    int segment_index = 0;
    int height = kMapHeight;
    int width = kMapWidth;
    std::vector<std::uint8_t> planes;  // 3 x height x width
    double label = 0.0;

    double value(int channel, int y, int x) const {
        return planes[(static_cast<std::size_t>(channel) * height + y) * width + x] / 255.0;
    }
    /// Full-resolution tensor in [0, 1].
    template <typename T>
    std::vector<T> tensor() const {
        std::vector<T> out(planes.size());
        for (std::size_t i = 0; i < planes.size(); ++i) out[i] = static_cast<T>(planes[i]) / T{255};
        return out;
    }
};

/// Stacks the three maps. Throws ModalityMismatch if lesson or segment
/// differ or modalities are misassigned, ShapeMismatch if sizes differ.
FusedSample fuse_feature_level(const FeatureMap& action, const FeatureMap& slide, const FeatureMap& voice,
                               double label);

/// Average-pools a sample to the network's prepared input layout.
template <typename T>
std::vector<T> prepare_input(const FusedSample& sample, const nn::ModelSpec& spec);

struct TrainConfig {
    double learning_rate = 1e-5;
    int batch_size = 16;
    int max_epochs = 200;
    int patience = 25;
    std::uint64_t seed = 42;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

/// Patience counter over validation loss. Only strict improvements reset it.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records epoch `epoch` (1-based); returns true if it is the new best.
    bool update(int epoch, double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_loss_ = 0.0;
    int since_best_ = 0;
};

using Model = nn::Network<float>;

struct TrainResult {
    Model model;
    std::vector<EpochLog> log;
    int best_epoch = 0;
    bool early_stopped = false;
};

using SampleRefs = std::vector<const FusedSample*>;

/// Mean squared error training with Adam and early stopping. Samples are put
/// in canonical (lesson, segment) order before the seeded shuffle, so the
/// caller's ordering never affects the result. Returns the best-validation
/// weights.
TrainResult train(const nn::ModelSpec& spec, const SampleRefs& train_set, const SampleRefs& val_set,
                  const TrainConfig& config);

/// One optimisation step on a batch of prepared inputs; returns the batch MSE
/// measured before the update. Throws NonFiniteLoss.
template <typename T>
double backward_and_step(nn::Network<T>& model, nn::Adam<T>& optimizer, std::span<const std::vector<T>* const> inputs,
                         std::span<const double> labels, double learning_rate);

std::vector<double> predict(const Model& model, const SampleRefs& samples);
double mean_squared_error(const Model& model, const SampleRefs& samples);

void write_training_log(std::ostream& os, const std::vector<EpochLog>& log);

/// Checkpoint: "ATTNCKPT", u32 version, spec fields as u32, u64 count, then
/// little-endian float32 weights.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

/// Fused tensor store for one lesson (gzip stream).
void save_fused_store(const std::filesystem::path& path, const std::vector<FusedSample>& samples);
std::vector<FusedSample> load_fused_store(const std::filesystem::path& path);

void canonical_sort(SampleRefs& refs);

}  // namespace attn::fusion
