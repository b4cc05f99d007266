#include "attn/image.hpp"

#include "attn/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace attn {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw InputError("cannot open " + path.string());
    return f;
}

void write_png_rows(const std::filesystem::path& path, int height, int width, int color_type, int channels,
                    const std::uint8_t* data) {
    auto f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("failed writing " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(data + stride * y));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

std::string modality_name(Modality m) {
    switch (m) {
        case Modality::action: return "action";
        case Modality::slide: return "slide";
        case Modality::voice: return "voice";
    }
    return "unknown";
}

std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w, int dst_h, int dst_w) {
    if (src.size() != static_cast<std::size_t>(src_h) * static_cast<std::size_t>(src_w) || src_h <= 0 ||
        src_w <= 0) {
        throw ShapeMismatch("resize source does not match its declared shape");
    }
    std::vector<double> out(static_cast<std::size_t>(dst_h) * dst_w);
    const double sy = static_cast<double>(src_h) / dst_h;
    const double sx = static_cast<double>(src_w) / dst_w;
    for (int y = 0; y < dst_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src_h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src_h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < dst_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src_w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src_w - 1);
            const double wx = fx - x0;
            const auto at = [&](int yy, int xx) { return src[static_cast<std::size_t>(yy) * src_w + xx]; };
            const double top = at(y0, x0) * (1 - wx) + at(y0, x1) * wx;
            const double bot = at(y1, x0) * (1 - wx) + at(y1, x1) * wx;
            out[static_cast<std::size_t>(y) * dst_w + x] = top * (1 - wy) + bot * wy;
        }
    }
    return out;
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    write_png_rows(path, img.height, img.width, PNG_COLOR_TYPE_GRAY, 1, img.pixels.data());
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
    write_png_rows(path, img.height, img.width, PNG_COLOR_TYPE_RGB, 3, img.pixels.data());
}

GrayImage read_png_gray(const std::filesystem::path& path) {
    auto f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialisation failed");
    }
    GrayImage img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("not a readable PNG: " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    img = GrayImage(static_cast<int>(png_get_image_height(png, info)), static_cast<int>(png_get_image_width(png, info)));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("unsupported PNG layout: " + path.string());
    }
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, &img.pixels[static_cast<std::size_t>(y) * img.width], nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw InputError("not a binary PGM: " + path.string());
    int vals[3];
    for (int& v : vals) {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            in >> std::ws;
        }
        if (!(in >> v)) throw InputError("truncated PGM header: " + path.string());
    }
    if (vals[2] != 255) throw InputError("only 8-bit PGM is supported: " + path.string());
    in.get();
    GrayImage img(vals[1], vals[0]);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw InputError("truncated PGM data: " + path.string());
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

GrayImage read_gray_image(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png_gray(path);
    throw InputError("unsupported image format: " + path.string());
}

}  // namespace attn
