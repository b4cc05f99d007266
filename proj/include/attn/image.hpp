#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attn {

inline constexpr int kMapHeight = 320;
inline constexpr int kMapWidth = 480;

/// Row-major 8-bit grayscale image.
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const { return pixels.empty(); }
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Row-major interleaved 8-bit RGB image (plots only).
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage(int h, int w)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3, 0) {}
    void set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

enum class Modality { action, slide, voice };

std::string modality_name(Modality m);

/// A single-modality map for one lesson segment.
struct FeatureMap {
    Modality modality = Modality::action;
    std::string lesson_id;
    int segment_index = 0;
    GrayImage image;
};

/// Bilinear resampling with pixel-centre alignment; input is real-valued
/// row-major [src_h x src_w].
std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w, int dst_h, int dst_w);

void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
GrayImage read_png_gray(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Dispatches on extension (.png or .pgm).
GrayImage read_gray_image(const std::filesystem::path& path);

}  // namespace attn
