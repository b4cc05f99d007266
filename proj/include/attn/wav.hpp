#pragma once

#include <filesystem>
#include <istream>
#include <vector>

namespace attn::wav {

struct Audio {
    int sample_rate_hz = 0;
    std::vector<float> samples;  // mono, nominally in [-1, 1]
};

/// Reads mono PCM16 or IEEE float32 WAV. Throws UnsupportedAudio for any
/// other layout and for sample rates other than `required_rate_hz`.
Audio read(std::istream& in, int required_rate_hz = 44100);
Audio read(const std::filesystem::path& path, int required_rate_hz = 44100);

/// Mono PCM16 writer.
void write_pcm16(const std::filesystem::path& path, const Audio& audio);

}  // namespace attn::wav
