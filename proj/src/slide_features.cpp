#include "attn/slide_features.hpp"

#include "attn/error.hpp"
#include "attn/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

namespace attn::slides {

ProgressionResult net_progression(const std::vector<SlideEvent>& events, int lesson_len_min, int block_min) {
    if (block_min <= 0 || lesson_len_min % block_min != 0) {
        throw Error("lesson length must be a whole number of blocks");
    }
    const int blocks = lesson_len_min / block_min;
    const double block_s = block_min * 60.0;
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].timestamp_s < events[i - 1].timestamp_s) throw Error("slide events are not time ordered");
    }
    std::vector<std::optional<int>> block_max(static_cast<std::size_t>(blocks));
    for (const auto& e : events) {
        if (e.timestamp_s < 0) continue;
        const auto b = static_cast<long>(e.timestamp_s / block_s);
        if (b >= blocks) continue;
        auto& m = block_max[static_cast<std::size_t>(b)];
        m = m ? std::max(*m, e.page) : e.page;
    }
    ProgressionResult out;
    out.p_raw.assign(static_cast<std::size_t>(blocks), 0.0);
    out.no_events = std::none_of(block_max.begin(), block_max.end(), [](const auto& m) { return m.has_value(); });
    std::optional<int> previous;
    for (int i = 0; i < blocks; ++i) {
        std::optional<int> current = block_max[i] ? block_max[i] : previous;
        if (i > 0 && previous && current) out.p_raw[i] = std::max(0, *current - *previous);
        previous = current;
    }
    return out;
}

SlideSeries expand_smooth_normalize(const std::vector<double>& p_raw, int repeat) {
    if (p_raw.empty()) throw EmptySeries();
    SlideSeries s;
    s.p_raw = p_raw;
    for (double v : p_raw) s.p_1min.insert(s.p_1min.end(), static_cast<std::size_t>(repeat), std::max(0.0, v));
    s.p_smooth = smoothing::moving_average(s.p_1min, 5);
    const double peak = *std::max_element(s.p_smooth.begin(), s.p_smooth.end());
    s.p_norm.assign(s.p_smooth.size(), 0.0);
    if (peak > 0.0) {
        for (std::size_t i = 0; i < s.p_smooth.size(); ++i) s.p_norm[i] = std::min(1.0, s.p_smooth[i] / peak);
    }
    return s;
}

GrayImage slide_matrix(double p_norm, int h, int w) {
    if (!(p_norm >= 0.0 && p_norm <= 1.0)) throw OutOfRange("slide value outside [0, 1]");
    return GrayImage(h, w, static_cast<std::uint8_t>(std::trunc(p_norm * 255.0)));
}

std::vector<SlideEvent> read_slide_csv(std::istream& in) {
    std::vector<SlideEvent> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != "timestamp_s,page") throw MalformedRow(line_no, "expected header timestamp_s,page");
            header = true;
            continue;
        }
        std::istringstream row(line);
        SlideEvent e;
        char comma = 0;
        if (!(row >> e.timestamp_s >> comma >> e.page) || comma != ',' || e.page < 1 ||
            !std::isfinite(e.timestamp_s)) {
            throw MalformedRow(line_no, "bad slide event row");
        }
        out.push_back(e);
    }
    if (!header) throw MalformedRow(1, "missing header timestamp_s,page");
    return out;
}

void write_slide_sidecar(std::ostream& os, const SlideSeries& series) {
    os << "segment_index,p_raw,p_1min,p_smooth,p_norm,intensity\n";
    const std::size_t repeat = series.p_raw.empty() ? 1 : series.p_1min.size() / series.p_raw.size();
    char buf[160];
    for (std::size_t i = 0; i < series.p_norm.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", i, series.p_raw[i / repeat],
                      series.p_1min[i], series.p_smooth[i], series.p_norm[i],
                      static_cast<int>(std::trunc(series.p_norm[i] * 255.0)));
        os << buf;
    }
}

}  // namespace attn::slides
