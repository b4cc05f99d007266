#include "attn/plots.hpp"

#include "attn/error.hpp"
#include "attn/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace attn::plots {
namespace {

Color zone_color(eval::Zone z) {
    switch (z) {
        case eval::Zone::low: return kLowColor;
        case eval::Zone::medium: return kMediumColor;
        case eval::Zone::high: return kHighColor;
    }
    return kMediumColor;
}

void blit_strip(RgbImage& img, int top, std::span<const double> values, double hi, double lo, int cw, int ch) {
    const auto zones = eval::discretize3(values, hi, lo);
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const auto c = zone_color(zones[i]);
        for (int y = 0; y < ch; ++y) {
            for (int x = 0; x < cw; ++x) img.set(top + y, static_cast<int>(i) * cw + x, c[0], c[1], c[2]);
        }
    }
}

std::string polyline(std::span<const double> v, double x0, double dx, double y0, double height) {
    std::ostringstream os;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", x0 + dx * static_cast<double>(i),
                      y0 + height * (1.0 - std::clamp(v[i], 0.0, 1.0)));
        os << buf;
    }
    return os.str();
}

}  // namespace

RgbImage zone_strip(std::span<const double> values, double hi, double lo, int cell_width, int cell_height) {
    RgbImage img(cell_height, std::max<int>(1, static_cast<int>(values.size()) * cell_width));
    blit_strip(img, 0, values, hi, lo, cell_width, cell_height);
    return img;
}

RgbImage attention_heatmap(std::span<const double> truth, std::span<const double> predicted, double hi, double lo) {
    if (truth.size() != predicted.size()) throw LengthMismatch("heatmap rows differ in length");
    constexpr int cw = 8, ch = 24, gap = 4;
    RgbImage img(2 * ch + gap, std::max<int>(1, static_cast<int>(truth.size()) * cw));
    std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t{255});
    blit_strip(img, 0, truth, hi, lo, cw, ch);
    blit_strip(img, ch + gap, predicted, hi, lo, cw, ch);
    return img;
}

std::string line_plot_svg(const std::string& title, std::span<const double> truth, std::span<const double> predicted,
                          std::span<const double> smoothed, double hi, double lo) {
    constexpr double width = 800, height = 300, left = 50, top = 30, plot_w = 720, plot_h = 230;
    const double n = static_cast<double>(std::max<std::size_t>(truth.size(), 2));
    const double dx = plot_w / (n - 1);
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  width, height, width, height);
    os << buf;
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"#888\"/>\n",
                  left, top, plot_w, plot_h);
    os << buf;
    for (double t : {hi, lo}) {
        const double y = top + plot_h * (1.0 - t);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.0f\" y1=\"%.2f\" x2=\"%.0f\" y2=\"%.2f\" stroke=\"#aaa\" stroke-dasharray=\"4 4\"/>\n",
                      left, y, left + plot_w, y);
        os << buf;
    }
    const auto line = [&](std::span<const double> v, const char* color, const char* name) {
        if (v.empty()) return;
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
           << polyline(v, left, dx, top, plot_h) << "\"><title>" << name << "</title></polyline>\n";
    };
    line(truth, "#222222", "truth");
    line(predicted, "#3182bd", "predicted");
    line(smoothed, "#de2d26", "smoothed");
    os << "<text x=\"" << left << "\" y=\"" << top + plot_h + 25
       << "\" font-family=\"sans-serif\" font-size=\"12\">black: truth, blue: predicted, red: smoothed</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace attn::plots
