#include "attn/audio_features.hpp"
#include "attn/error.hpp"
#include "attn/rng.hpp"
#include "attn/wav.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace attn;
using namespace attn::audio;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x) {
    const auto n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc{0, 0};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
            acc += x[t] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

AudioSegment tone(std::initializer_list<std::pair<double, double>> parts, double seconds = 2.0) {
    AudioSegment seg;
    seg.samples.resize(static_cast<std::size_t>(seconds * kSampleRateHz));
    for (std::size_t n = 0; n < seg.samples.size(); ++n) {
        double v = 0.0;
        for (auto [freq, amp] : parts) v += amp * std::sin(2.0 * std::numbers::pi * freq * n / kSampleRateHz);
        seg.samples[n] = static_cast<float>(v);
    }
    return seg;
}

}  // namespace

TEST_CASE("fft: impulse and constant") {
    std::vector<cd> impulse(8, 0.0), ones(8, 1.0);
    impulse[0] = 1.0;
    for (const auto& v : fft_radix2(impulse)) CHECK(std::abs(v - cd(1, 0)) < 1e-12);
    const auto dc = fft_radix2(ones);
    CHECK(std::abs(dc[0] - cd(8, 0)) < 1e-12);
    for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(dc[k]) < 1e-12);
}

TEST_CASE("fft: matches direct summation on random input") {
    Rng rng(21);
    for (std::size_t n : {1u, 2u, 16u, 256u}) {
        std::vector<cd> x(n);
        for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const auto fast = fft_radix2(x), slow = naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(fast[k] - slow[k]) <= 1e-9 * (1.0 + std::abs(slow[k])));
    }
}

TEST_CASE("fft: rejects lengths that are not powers of two") {
    std::vector<cd> x(12);
    CHECK_THROWS_AS(fft_radix2(x), NonPowerOfTwoLength);
    CHECK_THROWS_AS(fft_radix2(std::vector<cd>{}), NonPowerOfTwoLength);
}

TEST_CASE("frame count for one minute") {
    CHECK(frame_count(2646000) == 2953);
    CHECK(frame_count(1024) == 1);
    CHECK(frame_count(1024 + 896) == 2);
    CHECK(frame_count(1025) == 2);
    CHECK(frame_count(1023) == 0);
}

TEST_CASE("stft: silence and sign flip") {
    AudioSegment quiet;
    quiet.samples.assign(5000, 0.0f);
    for (double m : stft(quiet).magnitudes) CHECK(m == 0.0);

    auto seg = tone({{700.0, 0.4}, {3100.0, 0.2}}, 0.2);
    auto neg = seg;
    for (auto& v : neg.samples) v = -v;
    const auto a = stft(seg), b = stft(neg);
    REQUIRE(a.magnitudes.size() == b.magnitudes.size());
    for (std::size_t i = 0; i < a.magnitudes.size(); ++i) CHECK(a.magnitudes[i] == doctest::Approx(b.magnitudes[i]));
}

TEST_CASE("stft: bin-centred sine peaks at its bin") {
    // 41 whole frames, no zero padding.
    const auto sp = stft(tone({{10.0 * kSampleRateHz / kFftSize, 1.0}}, (1024.0 + 896.0 * 40) / kSampleRateHz));
    CHECK(sp.frames == 41);
    CHECK(sp.bins == 513);
    for (int f = 0; f < sp.frames; ++f) {
        int best = 0;
        for (int k = 1; k < sp.bins; ++k) {
            if (sp.at(f, k) > sp.at(f, best)) best = k;
        }
        CHECK(best == 10);
    }
}

TEST_CASE("feature map: silence is all zeros at full size") {
    AudioSegment quiet;
    quiet.samples.assign(60 * kSampleRateHz, 0.0f);
    const auto map = spectrogram_to_feature_map(stft(quiet));
    CHECK(map.height == kMapHeight);
    CHECK(map.width == kMapWidth);
    CHECK(std::all_of(map.pixels.begin(), map.pixels.end(), [](auto p) { return p == 0; }));
}

TEST_CASE("feature map: loud low tone lights the bottom rows") {
    const auto map = spectrogram_to_feature_map(stft(tone({{300.0, 0.8}, {15000.0, 0.05}})), 96, 64);
    double top = 0, bottom = 0;
    const int third = map.height / 3;
    for (int y = 0; y < third; ++y) {
        for (int x = 0; x < map.width; ++x) {
            top += map.at(y, x);
            bottom += map.at(map.height - 1 - y, x);
        }
    }
    CHECK(bottom > top);
}

TEST_CASE("feature map: gain invariance within one intensity step") {
    Rng rng(8);
    AudioSegment seg, loud;
    seg.samples.resize(20000);
    for (auto& v : seg.samples) v = static_cast<float>(rng.uniform(-0.3, 0.3));
    loud = seg;
    for (auto& v : loud.samples) v *= 2.0f;
    const auto a = spectrogram_to_feature_map(stft(seg), 64, 48);
    const auto b = spectrogram_to_feature_map(stft(loud), 64, 48);
    for (std::size_t i = 0; i < a.pixels.size(); ++i) CHECK(std::abs(int(a.pixels[i]) - int(b.pixels[i])) <= 1);
}

TEST_CASE("segment_audio zero-pads past the end") {
    wav::Audio audio{kSampleRateHz, std::vector<float>(90 * kSampleRateHz, 0.5f)};
    const auto second = segment_audio(audio, 1);
    CHECK(second.samples.size() == 60u * kSampleRateHz);
    CHECK(second.samples[0] == 0.5f);
    CHECK(second.samples.back() == 0.0f);
}

TEST_CASE("wav: pcm16 round trip and rate check") {
    const auto path = std::filesystem::temp_directory_path() / "attn_test_tone.wav";
    wav::Audio audio{kSampleRateHz, {0.0f, 0.5f, -0.5f, 0.25f}};
    wav::write_pcm16(path, audio);
    const auto back = wav::read(path);
    REQUIRE(back.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back.samples[i] == doctest::Approx(audio.samples[i]).epsilon(1e-4));
    CHECK_THROWS_AS(wav::read(path, 16000), UnsupportedAudio);
    std::filesystem::remove(path);
}
