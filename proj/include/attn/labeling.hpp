#pragma once

#include "attn/log_ingest.hpp"

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace attn::labeling {

inline constexpr int kSegmentCount = 95;
inline constexpr double kSegmentLengthS = 60.0;

/// Segment i spans [60 i, 60 (i + 1)) seconds.
struct SegmentGrid {
    std::string lesson_id;
    int segment_count = kSegmentCount;
    double segment_length_s = kSegmentLengthS;
};

enum class CountMode {
    access_events,    ///< every overlapping record counts once
    distinct_viewers  ///< each viewer counts at most once per segment
};

struct LabelSeries {
    std::string lesson_id;
    std::vector<std::int64_t> raw_counts;
    std::vector<double> smoothed;
    std::vector<double> normalized;
    bool degenerate = false;  ///< all counts were zero
};

/// Records must be clipped to the grid and belong to grid.lesson_id.
std::vector<std::int64_t> count_segment_accesses(const std::vector<logs::PlaybackRecord>& records,
                                                 const SegmentGrid& grid, double min_overlap_s = 1.0,
                                                 CountMode mode = CountMode::access_events);

/// Raw counts, 5-wide centered moving average, then division by the maximum.
LabelSeries generate_labels(const std::vector<logs::PlaybackRecord>& records, const SegmentGrid& grid,
                            double min_overlap_s = 1.0, CountMode mode = CountMode::access_events);

/// Builds the series from already-counted segments.
LabelSeries labels_from_counts(std::string lesson_id, std::vector<std::int64_t> raw_counts);

/// `segment_index,raw_count,smoothed,normalized`
void write_label_csv(std::ostream& os, const LabelSeries& labels);
LabelSeries read_label_csv(std::istream& is, const std::string& lesson_id);

}  // namespace attn::labeling
