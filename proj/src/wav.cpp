#include "attn/wav.hpp"

#include "attn/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace attn::wav {
namespace {

std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}
void put16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Audio read(std::istream& in, int required_rate_hz) {
    unsigned char riff[12];
    if (!in.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
        std::memcmp(riff + 8, "WAVE", 4) != 0) {
        throw UnsupportedAudio("not a RIFF/WAVE stream");
    }
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    while (true) {
        unsigned char hdr[8];
        if (!in.read(reinterpret_cast<char*>(hdr), 8)) throw UnsupportedAudio("WAV has no data chunk");
        const std::uint32_t size = le32(hdr + 4);
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            std::vector<unsigned char> fmt(size);
            if (size < 16 || !in.read(reinterpret_cast<char*>(fmt.data()), size)) {
                throw UnsupportedAudio("truncated fmt chunk");
            }
            format = le16(fmt.data());
            channels = le16(fmt.data() + 2);
            rate = le32(fmt.data() + 4);
            bits = le16(fmt.data() + 14);
            if (format == kFormatExtensible && size >= 26) format = le16(fmt.data() + 24);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            if (!have_fmt) throw UnsupportedAudio("data chunk precedes fmt chunk");
            if (channels != 1) throw UnsupportedAudio("only mono WAV is supported, got " + std::to_string(channels) + " channels");
            if (static_cast<int>(rate) != required_rate_hz) {
                throw UnsupportedAudio("sample rate " + std::to_string(rate) + " Hz, expected " +
                                       std::to_string(required_rate_hz));
            }
            const bool pcm16 = format == kFormatPcm && bits == 16;
            const bool f32 = format == kFormatFloat && bits == 32;
            if (!pcm16 && !f32) throw UnsupportedAudio("only PCM16 and float32 WAV are supported");
            std::vector<unsigned char> raw(size);
            in.read(reinterpret_cast<char*>(raw.data()), size);
            raw.resize(static_cast<std::size_t>(in.gcount()));
            Audio audio;
            audio.sample_rate_hz = static_cast<int>(rate);
            if (pcm16) {
                audio.samples.resize(raw.size() / 2);
                for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                    audio.samples[i] = static_cast<float>(static_cast<std::int16_t>(le16(&raw[2 * i]))) / 32768.0f;
                }
            } else {
                audio.samples.resize(raw.size() / 4);
                for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                    const std::uint32_t u = le32(&raw[4 * i]);
                    float v;
                    std::memcpy(&v, &u, 4);
                    audio.samples[i] = v;
                }
            }
            return audio;
        } else {
            in.ignore(size + (size & 1u));
        }
    }
}

Audio read(const std::filesystem::path& path, int required_rate_hz) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return read(in, required_rate_hz);
    } catch (const UnsupportedAudio& e) {
        throw UnsupportedAudio(path.string() + ": " + e.what());
    }
}

void write_pcm16(const std::filesystem::path& path, const Audio& audio) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path.string());
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    os.write("RIFF", 4);
    put32(os, 36 + data_bytes);
    os.write("WAVEfmt ", 8);
    put32(os, 16);
    put16(os, kFormatPcm);
    put16(os, 1);
    put32(os, static_cast<std::uint32_t>(audio.sample_rate_hz));
    put32(os, static_cast<std::uint32_t>(audio.sample_rate_hz) * 2);
    put16(os, 2);
    put16(os, 16);
    os.write("data", 4);
    put32(os, data_bytes);
    for (float s : audio.samples) {
        const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0f, 32767.0f / 32768.0f) * 32768.0f));
        put16(os, static_cast<std::uint16_t>(v));
    }
}

}  // namespace attn::wav
