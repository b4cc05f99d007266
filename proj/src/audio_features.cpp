#include "attn/audio_features.hpp"

#include "attn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace attn::audio {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (!is_power_of_two(n)) throw NonPowerOfTwoLength(n);
    int log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (int b = 0; b < log2n; ++b) {
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        }
        bitrev_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw LengthMismatch("FFT input length does not match the plan");
    for (std::size_t i = 0; i < n_; ++i) {
        if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const auto t = twiddles_[k * stride] * data[start + k + half];
                const auto u = data[start + k];
                data[start + k] = u + t;
                data[start + k + half] = u - t;
            }
        }
    }
}

std::vector<std::complex<double>> fft_radix2(std::span<const std::complex<double>> x) {
    FftPlan plan(x.size());
    std::vector<std::complex<double>> out(x.begin(), x.end());
    plan.forward(out);
    return out;
}

std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    }
    return w;
}

int frame_count(std::size_t num_samples, int fft_size, int hop) {
    if (num_samples < static_cast<std::size_t>(fft_size)) return 0;
    // A trailing partial frame is kept and zero-padded.
    const auto rest = num_samples - static_cast<std::size_t>(fft_size);
    const auto h = static_cast<std::size_t>(hop);
    return static_cast<int>((rest + h - 1) / h) + 1;
}

Spectrogram stft(const AudioSegment& seg, int fft_size, int overlap) {
    const int hop = fft_size - overlap;
    if (hop <= 0) throw Error("STFT overlap must be smaller than the FFT size");
    if (seg.samples.size() < static_cast<std::size_t>(fft_size)) {
        throw SeriesTooShort("audio segment shorter than one FFT frame");
    }
    const FftPlan plan(static_cast<std::size_t>(fft_size));
    const auto window = hann_window(fft_size);
    Spectrogram sp;
    sp.frames = frame_count(seg.samples.size(), fft_size, hop);
    sp.bins = fft_size / 2 + 1;
    sp.magnitudes.resize(static_cast<std::size_t>(sp.frames) * sp.bins);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size));
    for (int f = 0; f < sp.frames; ++f) {
        const std::size_t offset = static_cast<std::size_t>(f) * hop;
        const std::size_t avail = std::min<std::size_t>(static_cast<std::size_t>(fft_size), seg.samples.size() - offset);
        for (std::size_t i = 0; i < avail; ++i) buf[i] = {seg.samples[offset + i] * window[i], 0.0};
        for (std::size_t i = avail; i < buf.size(); ++i) buf[i] = {0.0, 0.0};
        plan.forward(buf);
        double* row = &sp.magnitudes[static_cast<std::size_t>(f) * sp.bins];
        for (int k = 0; k < sp.bins; ++k) row[k] = std::abs(buf[k]);
    }
    return sp;
}

GrayImage spectrogram_to_feature_map(const Spectrogram& sp, int h, int w) {
    if (sp.frames <= 0 || sp.bins <= 0) throw Error("empty spectrogram");
    // Transpose to [bins x frames] with the highest bin in row 0.
    std::vector<double> power(static_cast<std::size_t>(sp.bins) * sp.frames);
    for (int b = 0; b < sp.bins; ++b) {
        const int row = sp.bins - 1 - b;
        for (int f = 0; f < sp.frames; ++f) {
            const double m = sp.at(f, b);
            power[static_cast<std::size_t>(row) * sp.frames + f] = 10.0 * std::log10(m * m + 1e-10);
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(power.begin(), power.end());
    const double lo = *lo_it, hi = *hi_it;
    GrayImage img(h, w, 0);
    if (!(hi > lo)) return img;
    for (double& p : power) p = (p - lo) / (hi - lo) * 255.0;
    const auto resized = resize_bilinear(power, sp.bins, sp.frames, h, w);
    for (std::size_t i = 0; i < resized.size(); ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(resized[i], 0.0, 255.0)));
    }
    return img;
}

AudioSegment segment_audio(const wav::Audio& audio, int index, double segment_length_s) {
    AudioSegment seg;
    seg.sample_rate_hz = audio.sample_rate_hz;
    seg.segment_index = index;
    const auto length = static_cast<std::size_t>(std::llround(segment_length_s * audio.sample_rate_hz));
    seg.samples.assign(length, 0.0f);
    const std::size_t start = static_cast<std::size_t>(index) * length;
    if (start < audio.samples.size()) {
        const std::size_t n = std::min(length, audio.samples.size() - start);
        std::copy_n(audio.samples.begin() + static_cast<std::ptrdiff_t>(start), n, seg.samples.begin());
    }
    return seg;
}

}  // namespace attn::audio
