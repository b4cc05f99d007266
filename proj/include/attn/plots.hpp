#pragma once

#include "attn/image.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace attn::plots {

using Color = std::array<std::uint8_t, 3>;

inline constexpr Color kLowColor{49, 130, 189};
inline constexpr Color kMediumColor{254, 196, 79};
inline constexpr Color kHighColor{222, 45, 38};

/// One cell per value, colored by attention zone.
RgbImage zone_strip(std::span<const double> values, double hi = 0.5, double lo = 0.2, int cell_width = 8,
                    int cell_height = 24);

/// Ground-truth strip above the predicted strip, separated by a white gap.
RgbImage attention_heatmap(std::span<const double> truth, std::span<const double> predicted, double hi = 0.5,
                           double lo = 0.2);

/// Predicted-vs-truth line plot with the zone thresholds drawn as dashed lines.
std::string line_plot_svg(const std::string& title, std::span<const double> truth, std::span<const double> predicted,
                          std::span<const double> smoothed, double hi = 0.5, double lo = 0.2);

}  // namespace attn::plots
