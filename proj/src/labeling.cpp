#include "attn/labeling.hpp"

#include "attn/error.hpp"
#include "attn/smoothing.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

namespace attn::labeling {

std::vector<std::int64_t> count_segment_accesses(const std::vector<logs::PlaybackRecord>& records,
                                                 const SegmentGrid& grid, double min_overlap_s,
                                                 CountMode mode) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(grid.segment_count), 0);
    std::vector<std::set<std::string>> seen(mode == CountMode::distinct_viewers ? counts.size() : 0);
    for (const auto& r : records) {
        if (r.lesson_id != grid.lesson_id) continue;
        const auto first = std::max(0L, static_cast<long>(r.start_s / grid.segment_length_s));
        const auto last = std::min(static_cast<long>(grid.segment_count) - 1,
                                   static_cast<long>(r.end_s / grid.segment_length_s));
        for (long i = first; i <= last; ++i) {
            const double seg_lo = grid.segment_length_s * static_cast<double>(i);
            const double seg_hi = seg_lo + grid.segment_length_s;
            const double overlap = std::min(r.end_s, seg_hi) - std::max(r.start_s, seg_lo);
            if (overlap < min_overlap_s) continue;
            if (mode == CountMode::distinct_viewers && !seen[i].insert(r.viewer_id).second) continue;
            counts[i] += 1;
        }
    }
    return counts;
}

LabelSeries labels_from_counts(std::string lesson_id, std::vector<std::int64_t> raw_counts) {
    LabelSeries out;
    out.lesson_id = std::move(lesson_id);
    std::vector<double> as_real(raw_counts.begin(), raw_counts.end());
    out.raw_counts = std::move(raw_counts);
    out.smoothed = smoothing::moving_average(as_real, 5);
    const double peak = *std::max_element(out.smoothed.begin(), out.smoothed.end());
    out.normalized.assign(out.smoothed.size(), 0.0);
    if (peak > 0.0) {
        for (std::size_t i = 0; i < out.smoothed.size(); ++i) out.normalized[i] = out.smoothed[i] / peak;
    } else {
        out.degenerate = true;
    }
    return out;
}

LabelSeries generate_labels(const std::vector<logs::PlaybackRecord>& records, const SegmentGrid& grid,
                            double min_overlap_s, CountMode mode) {
    return labels_from_counts(grid.lesson_id, count_segment_accesses(records, grid, min_overlap_s, mode));
}

void write_label_csv(std::ostream& os, const LabelSeries& labels) {
    os << "segment_index,raw_count,smoothed,normalized\n";
    char buf[128];
    for (std::size_t i = 0; i < labels.normalized.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%lld,%.17g,%.17g\n", i,
                      static_cast<long long>(i < labels.raw_counts.size() ? labels.raw_counts[i] : 0),
                      labels.smoothed[i], labels.normalized[i]);
        os << buf;
    }
}

LabelSeries read_label_csv(std::istream& is, const std::string& lesson_id) {
    LabelSeries out;
    out.lesson_id = lesson_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "segment_index,raw_count,smoothed,normalized") throw MalformedRow(1, "unexpected label header");
            continue;
        }
        std::istringstream row(line);
        long long idx = 0, count = 0;
        double smoothed = 0, normalized = 0;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(row >> idx >> c1 >> count >> c2 >> smoothed >> c3 >> normalized) || c1 != ',' || c2 != ',' ||
            c3 != ',' || idx != static_cast<long long>(out.normalized.size())) {
            throw MalformedRow(line_no, "bad label row");
        }
        out.raw_counts.push_back(count);
        out.smoothed.push_back(smoothed);
        out.normalized.push_back(normalized);
    }
    out.degenerate = std::all_of(out.raw_counts.begin(), out.raw_counts.end(), [](auto c) { return c == 0; });
    return out;
}

}  // namespace attn::labeling
