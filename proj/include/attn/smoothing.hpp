#pragma once

#include <span>
#include <string_view>
#include <vector>

// Post-hoc temporal smoothers for per-minute sequences. None of these run
// inside training.
namespace attn::smoothing {

using Series = std::vector<double>;

/// Centered rolling mean; the window shrinks to the available neighbours at
/// the edges so the output keeps the input length. `window` must be odd.
Series moving_average(std::span<const double> s, int window = 5);

/// Savitzky-Golay filter. Interior points take the centre value of the
/// least-squares polynomial over the window. The first and last half-window
/// points are evaluated on the polynomial fitted to the first/last full
/// window, so polynomials up to `order` are reproduced everywhere.
Series savitzky_golay(std::span<const double> s, int window = 7, int order = 2);

/// Scalar Kalman filter with F = H = 1, state initialised to s[0].
/// Returns the posterior state after each measurement.
Series kalman_1d(std::span<const double> s, double p0 = 500.0, double r = 0.05, double q = 1e-4);

enum class Smoother { none, moving_average, savitzky_golay, kalman };

Smoother parse_smoother(std::string_view name);  // "none" | "ma" | "sg" | "kalman"
std::string_view smoother_name(Smoother s);

/// Applies a smoother with its default parameters.
Series apply(Smoother which, std::span<const double> s);

}  // namespace attn::smoothing
