#pragma once

#include "attn/image.hpp"

#include <istream>
#include <ostream>
#include <vector>

namespace attn::slides {

inline constexpr int kBlockMinutes = 5;
inline constexpr int kBlockCount = 19;  // 95 / 5

struct SlideEvent {
    double timestamp_s = 0.0;
    int page = 1;
};

struct SlideSeries {
    std::vector<double> p_raw;     // per 5-minute block
    std::vector<double> p_1min;    // p_raw repeated per minute
    std::vector<double> p_smooth;  // 5-wide centered moving average
    std::vector<double> p_norm;    // p_smooth / max
};

struct ProgressionResult {
    std::vector<double> p_raw;
    bool no_events = false;
};

/// Clamped forward difference of the maximum page between consecutive
/// blocks. Block 0 is 0; blocks without events carry the previous maximum;
/// blocks before the first event have no maximum and yield 0.
ProgressionResult net_progression(const std::vector<SlideEvent>& events, int lesson_len_min = 95,
                                  int block_min = kBlockMinutes);

SlideSeries expand_smooth_normalize(const std::vector<double>& p_raw, int repeat = kBlockMinutes);

/// Constant map of value trunc(p_norm * 255). Throws OutOfRange outside [0, 1].
GrayImage slide_matrix(double p_norm, int h = kMapHeight, int w = kMapWidth);

/// `timestamp_s,page` CSV with header.
std::vector<SlideEvent> read_slide_csv(std::istream& in);

/// Sidecar `segment_index,p_raw,p_1min,p_smooth,p_norm,intensity`.
void write_slide_sidecar(std::ostream& os, const SlideSeries& series);

}  // namespace attn::slides
