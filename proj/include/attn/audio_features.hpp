#pragma once

#include "attn/image.hpp"
#include "attn/wav.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace attn::audio {

inline constexpr int kSampleRateHz = 44100;
inline constexpr int kFftSize = 1024;
inline constexpr int kOverlap = 128;

/// One minute of mono audio, zero-padded when the source runs short.
struct AudioSegment {
    std::vector<float> samples;
    int sample_rate_hz = kSampleRateHz;
    int segment_index = 0;
};

/// Magnitude spectrogram, row-major [frames x bins]; bins = fft_size/2 + 1.
struct Spectrogram {
    int frames = 0;
    int bins = 0;
    std::vector<double> magnitudes;

    double at(int frame, int bin) const { return magnitudes[static_cast<std::size_t>(frame) * bins + bin]; }
};

/// Iterative radix-2 decimation-in-time FFT with cached twiddles.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);
    std::size_t size() const { return n_; }
    /// X[k] = sum_n x[n] exp(-2 pi i k n / N), in place.
    void forward(std::span<std::complex<double>> data) const;

private:
    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddles_;
};

/// Throws NonPowerOfTwoLength unless x.size() is 2^k.
std::vector<std::complex<double>> fft_radix2(std::span<const std::complex<double>> x);

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Number of frames for `num_samples` at the given frame and hop sizes,
/// counting a zero-padded trailing partial frame.
int frame_count(std::size_t num_samples, int fft_size = kFftSize, int hop = kFftSize - kOverlap);

Spectrogram stft(const AudioSegment& seg, int fft_size = kFftSize, int overlap = kOverlap);

/// Log-power (10 log10(|X|^2 + 1e-10)), per-segment min-max to [0, 255],
/// bilinear resize to h x w with time along x and the lowest frequency on
/// the bottom row. Constant spectrograms give an all-zero map.
GrayImage spectrogram_to_feature_map(const Spectrogram& sp, int h = kMapHeight, int w = kMapWidth);

/// Extracts minute `index` (zero-padded past the end of the recording).
AudioSegment segment_audio(const wav::Audio& audio, int index, double segment_length_s = 60.0);

}  // namespace attn::audio
