#include "attn/fusion_model.hpp"

#include "attn/error.hpp"
#include "attn/log_ingest.hpp"
#include "attn/rng.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>

namespace attn::fusion {
namespace {

constexpr char kCheckpointMagic[8] = {'A', 'T', 'T', 'N', 'C', 'K', 'P', 'T'};
constexpr char kStoreMagic[8] = {'A', 'T', 'T', 'N', 'F', 'U', 'S', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f32(float f) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        u32(u);
    }
    void f64(double d) {
        std::uint64_t u;
        std::memcpy(&u, &d, 8);
        u64(u);
    }
    void raw(const void* p, std::size_t n) {
        const auto* c = static_cast<const char*>(p);
        bytes.insert(bytes.end(), c, c + n);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<char> bytes;
};

class ByteReader {
public:
    ByteReader(std::vector<char> data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}
    const char* take(std::size_t n) {
        if (pos_ + n > data_.size()) throw InputError("truncated " + what_);
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint32_t u32() {
        const auto* p = reinterpret_cast<const unsigned char*>(take(4));
        return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
               (std::uint32_t{p[3]} << 24);
    }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        return lo | (std::uint64_t{u32()} << 32);
    }
    float f32() {
        const std::uint32_t u = u32();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    double f64() {
        const std::uint64_t u = u64();
        double d;
        std::memcpy(&d, &u, 8);
        return d;
    }
    std::string str() {
        const auto n = u32();
        const char* p = take(n);
        return std::string(p, n);
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::vector<char> data_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingStageArtifact("cannot open " + path.string());
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::filesystem::path& path, const std::vector<char>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<const std::vector<float>*> pointers(const std::vector<std::vector<float>>& v,
                                                const std::vector<std::size_t>& idx, std::size_t lo,
                                                std::size_t hi) {
    std::vector<const std::vector<float>*> out;
    for (std::size_t i = lo; i < hi; ++i) out.push_back(&v[idx[i]]);
    return out;
}

}  // namespace

FusedSample fuse_feature_level(const FeatureMap& action, const FeatureMap& slide, const FeatureMap& voice,
                               double label) {
    if (action.modality != Modality::action || slide.modality != Modality::slide || voice.modality != Modality::voice) {
        throw ModalityMismatch("maps must be given in action, slide, voice order");
    }
    if (action.lesson_id != slide.lesson_id || action.lesson_id != voice.lesson_id ||
        action.segment_index != slide.segment_index || action.segment_index != voice.segment_index) {
        throw ModalityMismatch("maps belong to different segments: " + action.lesson_id + "#" +
                               std::to_string(action.segment_index) + ", " + slide.lesson_id + "#" +
                               std::to_string(slide.segment_index) + ", " + voice.lesson_id + "#" +
                               std::to_string(voice.segment_index));
    }
    const auto& a = action.image;
    for (const auto* other : {&slide.image, &voice.image}) {
        if (other->height != a.height || other->width != a.width) throw ShapeMismatch("feature maps differ in size");
    }
    FusedSample s;
    s.lesson_id = action.lesson_id;
    s.segment_index = action.segment_index;
    s.height = a.height;
    s.width = a.width;
    s.label = label;
    s.planes.reserve(a.pixels.size() * 3);
    for (const auto* img : {&action.image, &slide.image, &voice.image}) {
        s.planes.insert(s.planes.end(), img->pixels.begin(), img->pixels.end());
    }
    return s;
}

template <typename T>
std::vector<T> prepare_input(const FusedSample& sample, const nn::ModelSpec& spec) {
    if (sample.height != spec.input_height || sample.width != spec.input_width ||
        sample.planes.size() != 3 * static_cast<std::size_t>(sample.height) * sample.width) {
        throw ShapeMismatch("sample " + sample.lesson_id + "#" + std::to_string(sample.segment_index) +
                            " does not match the model input shape");
    }
    const int f = spec.input_pool;
    const int oh = spec.pooled_height(), ow = spec.pooled_width();
    std::vector<std::uint32_t> sums(3 * static_cast<std::size_t>(oh) * ow, 0);
    const std::size_t plane = static_cast<std::size_t>(sample.height) * sample.width;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < oh * f; ++y) {
            const std::uint8_t* row = sample.planes.data() + c * plane + static_cast<std::size_t>(y) * sample.width;
            std::uint32_t* dst = sums.data() + (static_cast<std::size_t>(c) * oh + y / f) * ow;
            for (int x = 0; x < ow * f; ++x) dst[x / f] += row[x];
        }
    }
    std::vector<T> out(sums.size());
    const double norm = 1.0 / (255.0 * f * f);
    for (std::size_t i = 0; i < sums.size(); ++i) out[i] = static_cast<T>(sums[i] * norm);
    return out;
}

template std::vector<float> prepare_input<float>(const FusedSample&, const nn::ModelSpec&);
template std::vector<double> prepare_input<double>(const FusedSample&, const nn::ModelSpec&);

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || batch_size < 1 || max_epochs < 1 || patience < 1) {
        throw InputError("training config fields must be positive");
    }
}

bool EarlyStopping::update(int epoch, double val_loss) {
    if (best_epoch_ == 0 || val_loss < best_loss_) {
        best_epoch_ = epoch;
        best_loss_ = val_loss;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

template <typename T>
double backward_and_step(nn::Network<T>& model, nn::Adam<T>& optimizer, std::span<const std::vector<T>* const> inputs,
                         std::span<const double> labels, double learning_rate) {
    if (inputs.size() != labels.size() || inputs.empty()) throw LengthMismatch("batch inputs and labels differ");
    std::vector<T> grad(model.parameters().size(), T{0});
    const T scale = T{1} / static_cast<T>(inputs.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const T pred = model.accumulate_gradient(*inputs[i], static_cast<T>(labels[i]), scale, grad);
        const double e = static_cast<double>(pred) - labels[i];
        sq += e * e;
    }
    const double loss = sq / static_cast<double>(inputs.size());
    if (!std::isfinite(loss)) {
        throw NonFiniteLoss("non-finite batch loss after " + std::to_string(optimizer.steps()) + " optimizer steps");
    }
    optimizer.step(model.parameters(), grad, learning_rate);
    return loss;
}

template double backward_and_step<float>(nn::Network<float>&, nn::Adam<float>&,
                                         std::span<const std::vector<float>* const>, std::span<const double>, double);
template double backward_and_step<double>(nn::Network<double>&, nn::Adam<double>&,
                                          std::span<const std::vector<double>* const>, std::span<const double>,
                                          double);

void canonical_sort(SampleRefs& refs) {
    std::stable_sort(refs.begin(), refs.end(), [](const FusedSample* a, const FusedSample* b) {
        if (a->lesson_id != b->lesson_id) return logs::natural_less(a->lesson_id, b->lesson_id);
        return a->segment_index < b->segment_index;
    });
}

TrainResult train(const nn::ModelSpec& spec, const SampleRefs& train_set, const SampleRefs& val_set,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) throw EmptySplit("training split is empty");
    if (val_set.empty()) throw EmptySplit("validation split is empty");
    SampleRefs tr = train_set, va = val_set;
    canonical_sort(tr);
    canonical_sort(va);

    std::vector<std::vector<float>> train_inputs;
    std::vector<double> train_labels;
    for (const auto* s : tr) {
        train_inputs.push_back(prepare_input<float>(*s, spec));
        train_labels.push_back(s->label);
    }
    std::vector<std::vector<float>> val_inputs;
    for (const auto* s : va) val_inputs.push_back(prepare_input<float>(*s, spec));

    Model model(spec);
    model.init(config.seed);
    nn::Adam<float> adam(model.parameters().size());
    Rng shuffler(config.seed ^ 0x9E3779B97F4A7C15ULL);
    EarlyStopping stopper(config.patience);
    std::vector<float> best(model.parameters().begin(), model.parameters().end());

    TrainResult result{Model(spec), {}, 0, false};
    std::vector<std::size_t> order(tr.size());
    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffler.shuffle(std::span<std::size_t>(order));
        double sq_sum = 0.0;
        for (std::size_t lo = 0; lo < order.size(); lo += bs) {
            const std::size_t hi = std::min(order.size(), lo + bs);
            const auto batch = pointers(train_inputs, order, lo, hi);
            std::vector<double> labels;
            for (std::size_t i = lo; i < hi; ++i) labels.push_back(train_labels[order[i]]);
            try {
                sq_sum += backward_and_step<float>(model, adam, batch, labels, config.learning_rate) *
                          static_cast<double>(hi - lo);
            } catch (const NonFiniteLoss& e) {
                throw NonFiniteLoss(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch starting at " +
                                    std::to_string(lo) + ")");
            }
        }
        double val_sq = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double e = static_cast<double>(model.forward(val_inputs[i])) - va[i]->label;
            val_sq += e * e;
        }
        const EpochLog entry{epoch, sq_sum / static_cast<double>(tr.size()), val_sq / static_cast<double>(va.size())};
        result.log.push_back(entry);
        if (stopper.update(epoch, entry.val_mse)) {
            best.assign(model.parameters().begin(), model.parameters().end());
        }
        if (stopper.should_stop()) {
            result.early_stopped = epoch < config.max_epochs;
            break;
        }
    }
    std::copy(best.begin(), best.end(), result.model.parameters().begin());
    result.best_epoch = stopper.best_epoch();
    return result;
}

std::vector<double> predict(const Model& model, const SampleRefs& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto* s : samples) out.push_back(model.forward(prepare_input<float>(*s, model.spec())));
    return out;
}

double mean_squared_error(const Model& model, const SampleRefs& samples) {
    if (samples.empty()) throw EmptySplit("no samples to evaluate");
    const auto pred = predict(model, samples);
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sq += (pred[i] - samples[i]->label) * (pred[i] - samples[i]->label);
    return sq / static_cast<double>(pred.size());
}

void write_training_log(std::ostream& os, const std::vector<EpochLog>& log) {
    os << "epoch,train_mse,val_mse\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_mse, e.val_mse);
        os << buf;
    }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    ByteWriter w;
    w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
    w.u32(kFormatVersion);
    const auto& s = model.spec();
    w.u32(static_cast<std::uint32_t>(s.architecture));
    w.u32(static_cast<std::uint32_t>(s.fusion));
    for (int c : s.widths) w.u32(static_cast<std::uint32_t>(c));
    w.u32(static_cast<std::uint32_t>(s.dense));
    w.u32(static_cast<std::uint32_t>(s.input_height));
    w.u32(static_cast<std::uint32_t>(s.input_width));
    w.u32(static_cast<std::uint32_t>(s.input_pool));
    w.u64(model.parameters().size());
    for (float p : model.parameters()) w.f32(p);
    write_all(path, w.bytes);
}

Model load_checkpoint(const std::filesystem::path& path) {
    ByteReader r(read_all(path), "checkpoint " + path.string());
    if (std::memcmp(r.take(8), kCheckpointMagic, 8) != 0) throw InputError("not a checkpoint: " + path.string());
    if (r.u32() != kFormatVersion) throw InputError("unsupported checkpoint version: " + path.string());
    nn::ModelSpec s;
    const auto arch = r.u32();
    const auto fusion = r.u32();
    if (arch > 1 || fusion > 1) throw InputError("corrupt checkpoint spec: " + path.string());
    s.architecture = static_cast<nn::Architecture>(arch);
    s.fusion = static_cast<nn::Fusion>(fusion);
    for (int& c : s.widths) c = static_cast<int>(r.u32());
    s.dense = static_cast<int>(r.u32());
    s.input_height = static_cast<int>(r.u32());
    s.input_width = static_cast<int>(r.u32());
    s.input_pool = static_cast<int>(r.u32());
    Model model(s);
    if (r.u64() != model.parameters().size()) throw InputError("checkpoint parameter count mismatch: " + path.string());
    for (float& p : model.parameters()) p = r.f32();
    if (!r.done()) throw InputError("trailing bytes in checkpoint: " + path.string());
    return model;
}

void save_fused_store(const std::filesystem::path& path, const std::vector<FusedSample>& samples) {
    ByteWriter w;
    w.raw(kStoreMagic, sizeof kStoreMagic);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
        w.str(s.lesson_id);
        w.u32(static_cast<std::uint32_t>(s.segment_index));
        w.u32(static_cast<std::uint32_t>(s.height));
        w.u32(static_cast<std::uint32_t>(s.width));
        w.f64(s.label);
        w.raw(s.planes.data(), s.planes.size());
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    gzFile gz = gzopen(path.c_str(), "wb6");
    if (!gz) throw InputError("cannot write " + path.string());
    const int written = gzwrite(gz, w.bytes.data(), static_cast<unsigned>(w.bytes.size()));
    if (gzclose(gz) != Z_OK || written != static_cast<int>(w.bytes.size())) {
        throw Error("failed writing fused store " + path.string());
    }
}

std::vector<FusedSample> load_fused_store(const std::filesystem::path& path) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw MissingStageArtifact("cannot open fused store " + path.string() + " (run `attn fuse` first)");
    std::vector<char> bytes;
    char buf[1 << 16];
    int n;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) bytes.insert(bytes.end(), buf, buf + n);
    const bool ok = n == 0;
    gzclose(gz);
    if (!ok) throw InputError("corrupt fused store " + path.string());
    ByteReader r(std::move(bytes), "fused store " + path.string());
    if (std::memcmp(r.take(8), kStoreMagic, 8) != 0) throw InputError("not a fused store: " + path.string());
    if (r.u32() != kFormatVersion) throw InputError("unsupported fused store version: " + path.string());
    const auto count = r.u32();
    std::vector<FusedSample> out(count);
    for (auto& s : out) {
        s.lesson_id = r.str();
        s.segment_index = static_cast<int>(r.u32());
        s.height = static_cast<int>(r.u32());
        s.width = static_cast<int>(r.u32());
        s.label = r.f64();
        const std::size_t bytes_n = 3 * static_cast<std::size_t>(s.height) * s.width;
        const char* p = r.take(bytes_n);
        s.planes.assign(reinterpret_cast<const std::uint8_t*>(p), reinterpret_cast<const std::uint8_t*>(p) + bytes_n);
    }
    if (!r.done()) throw InputError("trailing bytes in fused store " + path.string());
    return out;
}

}  // namespace attn::fusion
