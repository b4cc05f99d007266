#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace attn::nn {

enum class Architecture { mini_plain, mini_residual };
enum class Fusion { feature_level, model_level };

std::string architecture_name(Architecture a);
std::string fusion_name(Fusion f);
Architecture parse_architecture(const std::string& s);
Fusion parse_fusion(const std::string& s);

/// Miniature backbone description.
///
/// Each branch: fixed `input_pool` x `input_pool` average pooling, then four
/// blocks of 3x3 conv (zero padding 1) -> [+ zero-padded identity] -> ReLU ->
/// 2x2 max pool, global average pooling, dense(`dense`) + ReLU.
/// Feature-level fusion runs one branch on the 3-channel input; model-level
/// fusion runs one 1-channel branch per modality and concatenates the dense
/// features. The head is dense(1) + sigmoid in both cases.
struct ModelSpec {
    Architecture architecture = Architecture::mini_plain;
    Fusion fusion = Fusion::feature_level;
    std::array<int, 4> widths{8, 16, 32, 64};
    int dense = 64;
    int input_height = 320;
    int input_width = 480;
    int input_pool = 4;

    int branches() const { return fusion == Fusion::model_level ? 3 : 1; }
    int branch_channels() const { return fusion == Fusion::model_level ? 1 : 3; }
    int pooled_height() const { return input_height / input_pool; }
    int pooled_width() const { return input_width / input_pool; }
    /// Elements of one prepared (pooled) input: 3 x pooled_height x pooled_width.
    std::size_t prepared_size() const {
        return 3 * static_cast<std::size_t>(pooled_height()) * static_cast<std::size_t>(pooled_width());
    }
    /// Throws ShapeMismatch if the spatial size collapses before the last block.
    void validate() const;
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::size_t parameter_count(const ModelSpec& spec);
/// Parameters of the convolution layers only (weights and biases).
std::size_t conv_parameter_count(const ModelSpec& spec);

/// Human-readable layer table (one row per layer with output shape and
/// parameter count).
std::vector<std::string> layer_table(const ModelSpec& spec);

/// Average-pools a [3 x H x W] tensor by `factor` (floor).
template <typename T>
std::vector<T> pool_input(std::span<const T> input, int height, int width, int factor);

/// One convolution block on a [cin x h x w] tensor. With `residual`, the input
/// is added to the first `cin` output channels before the ReLU. With `pool`,
/// a 2x2 max pool follows. Exposed for testing.
template <typename T>
std::vector<T> block_forward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight,
                             std::span<const T> bias, int cout, bool residual, bool pool);

template <typename T>
class Network {
public:
    explicit Network(ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }
    std::span<T> parameters() { return params_; }
    std::span<const T> parameters() const { return params_; }

    /// He-uniform weights, zero biases.
    void init(std::uint64_t seed);

    /// Prediction in (0, 1) for a prepared input (see ModelSpec::prepared_size).
    T forward(std::span<const T> prepared) const;

    /// Forward pass, then adds `scale * d(prediction - label)^2 / d(params)`
    /// into `grad`. Returns the prediction.
    T accumulate_gradient(std::span<const T> prepared, T label, T scale, std::span<T> grad) const;

    /// Offsets of the head layer (weights then bias) inside parameters().
    std::size_t head_offset() const { return head_offset_; }

    /// Offsets of branch `b`, block `l` conv weights inside parameters().
    std::size_t conv_weight_offset(int b, int l) const { return layout_[b].conv_w[l]; }
    std::size_t conv_bias_offset(int b, int l) const { return layout_[b].conv_b[l]; }

private:
    struct BranchLayout {
        std::array<std::size_t, 4> conv_w{};
        std::array<std::size_t, 4> conv_b{};
        std::size_t dense_w = 0;
        std::size_t dense_b = 0;
    };

    T run(std::span<const T> prepared, const T* label, T scale, T* grad) const;

    ModelSpec spec_;
    std::vector<T> params_;
    std::vector<BranchLayout> layout_;
    std::size_t head_offset_ = 0;
};

/// Adam with bias correction.
template <typename T>
class Adam {
public:
    explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(n, T{0}), v_(n, T{0}), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::span<T> params, std::span<const T> grad, double lr);
    long steps() const { return t_; }

private:
    std::vector<T> m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;
extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace attn::nn
