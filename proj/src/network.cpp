#include "attn/network.hpp"

#include "attn/error.hpp"
#include "attn/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace attn::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// cols is [(cin * 9) x (h * w)]; row (c, ky, kx) holds x[c, y + ky - 1, x + kx - 1].
template <typename T>
void im2col(const T* x, int cin, int h, int w, T* cols) {
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < cin; ++c) {
        const T* plane = x + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* row = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
                const int dx = kx - 1;
                const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
                for (int y = 0; y < h; ++y) {
                    T* out = row + static_cast<std::size_t>(y) * w;
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) {
                        std::fill(out, out + w, T{0});
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(sy) * w;
                    std::fill(out, out + x_lo, T{0});
                    for (int xx = x_lo; xx < x_hi; ++xx) out[xx] = src[xx + dx];
                    std::fill(out + x_hi, out + w, T{0});
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, int cin, int h, int w, T* dx_out) {
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < cin; ++c) {
        T* plane = dx_out + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* row = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
                const int dx = kx - 1;
                const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    const T* in = row + static_cast<std::size_t>(y) * w;
                    T* dst = plane + static_cast<std::size_t>(sy) * w;
                    for (int xx = x_lo; xx < x_hi; ++xx) dst[xx + dx] += in[xx];
                }
            }
        }
    }
}

// Returns pooled [c x h/2 x w/2]; argmax holds the flat source index per output.
template <typename T>
std::vector<T> max_pool(const std::vector<T>& a, int c, int h, int w, std::vector<std::uint32_t>* argmax) {
    const int oh = h / 2, ow = w / 2;
    std::vector<T> out(static_cast<std::size_t>(c) * oh * ow);
    if (argmax) argmax->resize(out.size());
    std::size_t o = 0;
    for (int ch = 0; ch < c; ++ch) {
        const std::size_t base = static_cast<std::size_t>(ch) * h * w;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x, ++o) {
                std::size_t best = base + static_cast<std::size_t>(2 * y) * w + 2 * x;
                const std::size_t cand[3] = {best + 1, best + static_cast<std::size_t>(w),
                                             best + static_cast<std::size_t>(w) + 1};
                for (auto k : cand) {
                    if (a[k] > a[best]) best = k;
                }
                out[o] = a[best];
                if (argmax) (*argmax)[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return out;
}

template <typename T>
T sigmoid(T s) {
    return s >= T{0} ? T{1} / (T{1} + std::exp(-s)) : std::exp(s) / (T{1} + std::exp(s));
}

struct BlockTape {
    int cin = 0, cout = 0, h = 0, w = 0;
};

}  // namespace

std::string architecture_name(Architecture a) {
    return a == Architecture::mini_plain ? "mini_plain" : "mini_residual";
}
std::string fusion_name(Fusion f) { return f == Fusion::feature_level ? "feature_level" : "model_level"; }

Architecture parse_architecture(const std::string& s) {
    if (s == "mini_plain") return Architecture::mini_plain;
    if (s == "mini_residual") return Architecture::mini_residual;
    throw InputError("unknown architecture '" + s + "' (expected mini_plain|mini_residual)");
}

Fusion parse_fusion(const std::string& s) {
    if (s == "feature_level") return Fusion::feature_level;
    if (s == "model_level") return Fusion::model_level;
    throw InputError("unknown fusion '" + s + "' (expected feature_level|model_level)");
}

void ModelSpec::validate() const {
    if (input_pool < 1 || dense < 1) throw ShapeMismatch("input_pool and dense width must be positive");
    for (int c : widths) {
        if (c < 1) throw ShapeMismatch("layer widths must be positive");
    }
    int h = pooled_height(), w = pooled_width();
    for (int l = 0; l < 4; ++l) {
        h /= 2;
        w /= 2;
    }
    if (h < 1 || w < 1) throw ShapeMismatch("input too small for four 2x2 pooling stages");
}

std::size_t conv_parameter_count(const ModelSpec& spec) {
    std::size_t per_branch = 0;
    int cin = spec.branch_channels();
    for (int c : spec.widths) {
        per_branch += static_cast<std::size_t>(c) * cin * 9 + c;
        cin = c;
    }
    return per_branch * spec.branches();
}

std::size_t parameter_count(const ModelSpec& spec) {
    const std::size_t dense = static_cast<std::size_t>(spec.dense) * spec.widths[3] + spec.dense;
    const std::size_t head = static_cast<std::size_t>(spec.dense) * spec.branches() + 1;
    return conv_parameter_count(spec) + dense * spec.branches() + head;
}

std::vector<std::string> layer_table(const ModelSpec& spec) {
    std::vector<std::string> rows;
    char buf[200];
    int h = spec.pooled_height(), w = spec.pooled_width();
    int cin = spec.branch_channels();
    const char* skip = spec.architecture == Architecture::mini_residual ? " + identity" : "";
    std::snprintf(buf, sizeof buf, "branches x%d, input %dx%dx%d, avgpool %d -> %dx%dx%d", spec.branches(),
                  spec.branch_channels(), spec.input_height, spec.input_width, spec.input_pool, cin, h, w);
    rows.emplace_back(buf);
    for (int l = 0; l < 4; ++l) {
        const int c = spec.widths[l];
        const std::size_t params = static_cast<std::size_t>(c) * cin * 9 + c;
        std::snprintf(buf, sizeof buf, "block%d: conv3x3 %d->%d%s, relu, maxpool2 -> %dx%dx%d  params %zu", l + 1,
                      cin, c, skip, c, h / 2, w / 2, params);
        rows.emplace_back(buf);
        h /= 2;
        w /= 2;
        cin = c;
    }
    std::snprintf(buf, sizeof buf, "gap -> %d; dense %d->%d relu  params %zu", cin, cin, spec.dense,
                  static_cast<std::size_t>(spec.dense) * cin + spec.dense);
    rows.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "head: dense %d->1 sigmoid  params %d", spec.dense * spec.branches(),
                  spec.dense * spec.branches() + 1);
    rows.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "total params %zu (conv %zu)", parameter_count(spec), conv_parameter_count(spec));
    rows.emplace_back(buf);
    return rows;
}

template <typename T>
std::vector<T> pool_input(std::span<const T> input, int height, int width, int factor) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    if (input.size() != 3 * plane) throw ShapeMismatch("input tensor is not 3 x H x W");
    const int oh = height / factor, ow = width / factor;
    std::vector<T> out(3 * static_cast<std::size_t>(oh) * ow, T{0});
    const T norm = T{1} / static_cast<T>(factor * factor);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < oh * factor; ++y) {
            const T* row = input.data() + c * plane + static_cast<std::size_t>(y) * width;
            T* dst = out.data() + (static_cast<std::size_t>(c) * oh + y / factor) * ow;
            for (int x = 0; x < ow * factor; ++x) dst[x / factor] += row[x];
        }
    }
    for (auto& v : out) v *= norm;
    return out;
}

template <typename T>
std::vector<T> block_forward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight,
                             std::span<const T> bias, int cout, bool residual, bool pool) {
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    if (x.size() != static_cast<std::size_t>(cin) * hw || weight.size() != static_cast<std::size_t>(cout) * cin * 9 ||
        bias.size() != static_cast<std::size_t>(cout) || (residual && cout < cin)) {
        throw ShapeMismatch("block_forward arguments do not match the declared shape");
    }
    std::vector<T> cols(static_cast<std::size_t>(cin) * 9 * hw);
    im2col(x.data(), cin, h, w, cols.data());
    std::vector<T> z(static_cast<std::size_t>(cout) * hw);
    Eigen::Map<RowMat<T>> zm(z.data(), cout, static_cast<Eigen::Index>(hw));
    zm.noalias() = Eigen::Map<const RowMat<T>>(weight.data(), cout, cin * 9) *
                   Eigen::Map<const RowMat<T>>(cols.data(), cin * 9, static_cast<Eigen::Index>(hw));
    for (int c = 0; c < cout; ++c) zm.row(c).array() += bias[c];
    if (residual) {
        for (std::size_t i = 0; i < x.size(); ++i) z[i] += x[i];
    }
    for (auto& v : z) v = std::max(v, T{0});
    if (!pool) return z;
    return max_pool(z, cout, h, w, static_cast<std::vector<std::uint32_t>*>(nullptr));
}

template <typename T>
Network<T>::Network(ModelSpec spec) : spec_(spec) {
    spec_.validate();
    std::size_t off = 0;
    layout_.resize(static_cast<std::size_t>(spec_.branches()));
    for (auto& lay : layout_) {
        int cin = spec_.branch_channels();
        for (int l = 0; l < 4; ++l) {
            const int c = spec_.widths[l];
            lay.conv_w[l] = off;
            off += static_cast<std::size_t>(c) * cin * 9;
            lay.conv_b[l] = off;
            off += c;
            cin = c;
        }
        lay.dense_w = off;
        off += static_cast<std::size_t>(spec_.dense) * cin;
        lay.dense_b = off;
        off += spec_.dense;
    }
    head_offset_ = off;
    off += static_cast<std::size_t>(spec_.dense) * spec_.branches() + 1;
    params_.assign(off, T{0});
}

template <typename T>
void Network<T>::init(std::uint64_t seed) {
    Rng rng(seed);
    const auto fill = [&](std::size_t off, std::size_t n, int fan_in) {
        const double limit = std::sqrt(6.0 / fan_in);
        for (std::size_t i = 0; i < n; ++i) params_[off + i] = static_cast<T>(rng.uniform(-limit, limit));
    };
    std::fill(params_.begin(), params_.end(), T{0});
    for (const auto& lay : layout_) {
        int cin = spec_.branch_channels();
        for (int l = 0; l < 4; ++l) {
            const int c = spec_.widths[l];
            fill(lay.conv_w[l], static_cast<std::size_t>(c) * cin * 9, cin * 9);
            cin = c;
        }
        fill(lay.dense_w, static_cast<std::size_t>(spec_.dense) * cin, cin);
    }
    fill(head_offset_, static_cast<std::size_t>(spec_.dense) * spec_.branches(), spec_.dense * spec_.branches());
}

template <typename T>
T Network<T>::forward(std::span<const T> prepared) const {
    return run(prepared, nullptr, T{0}, nullptr);
}

template <typename T>
T Network<T>::accumulate_gradient(std::span<const T> prepared, T label, T scale, std::span<T> grad) const {
    if (grad.size() != params_.size()) throw ShapeMismatch("gradient buffer does not match parameter count");
    return run(prepared, &label, scale, grad.data());
}

template <typename T>
T Network<T>::run(std::span<const T> prepared, const T* label, T scale, T* grad) const {
    if (prepared.size() != spec_.prepared_size()) throw ShapeMismatch("prepared input has the wrong size");
    const bool training = grad != nullptr;
    const bool residual = spec_.architecture == Architecture::mini_residual;
    const int nb = spec_.branches();
    const int D = spec_.dense;
    const int C4 = spec_.widths[3];
    const std::size_t plane = static_cast<std::size_t>(spec_.pooled_height()) * spec_.pooled_width();
    const T* P = params_.data();

    struct BranchTape {
        std::array<BlockTape, 4> dims;
        std::array<std::vector<T>, 4> cols, act;
        std::array<std::vector<std::uint32_t>, 4> argmax;
        int h4 = 0, w4 = 0;
        Vec<T> gap, hidden_pre;
    };
    std::vector<BranchTape> tapes(static_cast<std::size_t>(nb));
    Vec<T> features(D * nb);

    for (int b = 0; b < nb; ++b) {
        const auto& lay = layout_[b];
        auto& tp = tapes[b];
        int cin = spec_.branch_channels();
        int h = spec_.pooled_height(), w = spec_.pooled_width();
        const T* src = spec_.fusion == Fusion::model_level ? prepared.data() + b * plane : prepared.data();
        std::vector<T> x(src, src + cin * plane);
        for (int l = 0; l < 4; ++l) {
            const int cout = spec_.widths[l];
            const std::size_t hw = static_cast<std::size_t>(h) * w;
            std::vector<T> cols(static_cast<std::size_t>(cin) * 9 * hw);
            im2col(x.data(), cin, h, w, cols.data());
            std::vector<T> z(static_cast<std::size_t>(cout) * hw);
            Eigen::Map<RowMat<T>> zm(z.data(), cout, static_cast<Eigen::Index>(hw));
            zm.noalias() = Eigen::Map<const RowMat<T>>(P + lay.conv_w[l], cout, cin * 9) *
                           Eigen::Map<const RowMat<T>>(cols.data(), cin * 9, static_cast<Eigen::Index>(hw));
            for (int c = 0; c < cout; ++c) zm.row(c).array() += P[lay.conv_b[l] + c];
            if (residual) {
                for (std::size_t i = 0; i < x.size(); ++i) z[i] += x[i];
            }
            for (auto& v : z) v = std::max(v, T{0});
            tp.dims[l] = {cin, cout, h, w};
            x = max_pool(z, cout, h, w, training ? &tp.argmax[l] : nullptr);
            if (training) {
                tp.cols[l] = std::move(cols);
                tp.act[l] = std::move(z);
            }
            h /= 2;
            w /= 2;
            cin = cout;
        }
        tp.h4 = h;
        tp.w4 = w;
        const std::size_t hw4 = static_cast<std::size_t>(h) * w;
        tp.gap = Eigen::Map<const RowMat<T>>(x.data(), C4, static_cast<Eigen::Index>(hw4)).rowwise().mean();
        tp.hidden_pre = Eigen::Map<const RowMat<T>>(P + lay.dense_w, D, C4) * tp.gap +
                        Eigen::Map<const Vec<T>>(P + lay.dense_b, D);
        features.segment(b * D, D) = tp.hidden_pre.cwiseMax(T{0});
    }

    const T logit = Eigen::Map<const Vec<T>>(P + head_offset_, D * nb).dot(features) + P[head_offset_ + D * nb];
    const T pred = sigmoid(logit);
    if (!training) return pred;

    // Backward.
    T* G = grad;
    const T dpred = scale * T{2} * (pred - *label);
    const T dlogit = dpred * pred * (T{1} - pred);
    Eigen::Map<Vec<T>>(G + head_offset_, D * nb) += dlogit * features;
    G[head_offset_ + D * nb] += dlogit;
    const Vec<T> dfeatures = dlogit * Eigen::Map<const Vec<T>>(P + head_offset_, D * nb);

    for (int b = 0; b < nb; ++b) {
        const auto& lay = layout_[b];
        auto& tp = tapes[b];
        Vec<T> dhidden = dfeatures.segment(b * D, D);
        for (int i = 0; i < D; ++i) {
            if (!(tp.hidden_pre(i) > T{0})) dhidden(i) = T{0};
        }
        Eigen::Map<RowMat<T>>(G + lay.dense_w, D, C4).noalias() += dhidden * tp.gap.transpose();
        Eigen::Map<Vec<T>>(G + lay.dense_b, D) += dhidden;
        const Vec<T> dgap = Eigen::Map<const RowMat<T>>(P + lay.dense_w, D, C4).transpose() * dhidden;

        const std::size_t hw4 = static_cast<std::size_t>(tp.h4) * tp.w4;
        std::vector<T> dx(static_cast<std::size_t>(C4) * hw4);
        for (int c = 0; c < C4; ++c) {
            std::fill_n(dx.begin() + static_cast<std::ptrdiff_t>(c * hw4), hw4, dgap(c) / static_cast<T>(hw4));
        }
        for (int l = 3; l >= 0; --l) {
            const auto& d = tp.dims[l];
            const std::size_t hw = static_cast<std::size_t>(d.h) * d.w;
            std::vector<T> dz(static_cast<std::size_t>(d.cout) * hw, T{0});
            const auto& am = tp.argmax[l];
            for (std::size_t o = 0; o < am.size(); ++o) dz[am[o]] += dx[o];
            const auto& act = tp.act[l];
            for (std::size_t i = 0; i < dz.size(); ++i) {
                if (!(act[i] > T{0})) dz[i] = T{0};
            }
            Eigen::Map<const RowMat<T>> dzm(dz.data(), d.cout, static_cast<Eigen::Index>(hw));
            Eigen::Map<const RowMat<T>> colsm(tp.cols[l].data(), d.cin * 9, static_cast<Eigen::Index>(hw));
            Eigen::Map<RowMat<T>>(G + lay.conv_w[l], d.cout, d.cin * 9).noalias() += dzm * colsm.transpose();
            Eigen::Map<Vec<T>>(G + lay.conv_b[l], d.cout) += dzm.rowwise().sum();
            if (l == 0) break;
            RowMat<T> dcols = Eigen::Map<const RowMat<T>>(P + lay.conv_w[l], d.cout, d.cin * 9).transpose() * dzm;
            std::vector<T> dxin(static_cast<std::size_t>(d.cin) * hw, T{0});
            col2im_add(dcols.data(), d.cin, d.h, d.w, dxin.data());
            if (residual) {
                for (std::size_t i = 0; i < dxin.size(); ++i) dxin[i] += dz[i];
            }
            dx = std::move(dxin);
        }
    }
    return pred;
}

template <typename T>
void Adam<T>::step(std::span<T> params, std::span<const T> grad, double lr) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeMismatch("Adam state size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (T{1} - b1) * grad[i];
        v_[i] = b2 * v_[i] + (T{1} - b2) * grad[i] * grad[i];
        const double mhat = static_cast<double>(m_[i]) / c1;
        const double vhat = static_cast<double>(v_[i]) / c2;
        params[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
}

template std::vector<float> pool_input<float>(std::span<const float>, int, int, int);
template std::vector<double> pool_input<double>(std::span<const double>, int, int, int);
template std::vector<float> block_forward<float>(std::span<const float>, int, int, int, std::span<const float>,
                                                 std::span<const float>, int, bool, bool);
template std::vector<double> block_forward<double>(std::span<const double>, int, int, int, std::span<const double>,
                                                   std::span<const double>, int, bool, bool);
template class Network<float>;
template class Network<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace attn::nn
