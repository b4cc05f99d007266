#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace attn::logs {

/// Archives are standardized to 95 one-minute segments.
inline constexpr double kLessonLengthS = 95.0 * 60.0;

/// One viewer's contiguous playback interval inside one lesson archive.
struct PlaybackRecord {
    std::string viewer_id;
    std::string lesson_id;
    double start_s = 0.0;
    double end_s = 0.0;

    double duration() const { return end_s - start_s; }
    friend bool operator==(const PlaybackRecord&, const PlaybackRecord&) = default;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<PlaybackRecord> records;
    std::vector<Rejection> rejections;

    /// Human-readable rejection summary, one line per rejected row.
    std::string rejection_report() const;
};

using ViewerKey = std::pair<std::string, std::string>;  // (viewer_id, lesson_id)
using ViewerTotals = std::map<ViewerKey, double>;

/// Parses `viewer_id,lesson_id,start_s,end_s` CSV with a header row.
/// Throws MalformedRow for structural errors; rows with end_s <= start_s or
/// negative start_s are rejected and listed in the result.
ParseResult parse_playback_log(std::istream& source);

/// Keeps records lasting at least `min_record_s` seconds.
std::vector<PlaybackRecord> filter_valid_records(const std::vector<PlaybackRecord>& records,
                                                 double min_record_s = 60.0);

ViewerTotals viewer_totals(const std::vector<PlaybackRecord>& records);

/// Viewer/lesson pairs whose summed duration is strictly above `min_total_s`.
std::set<ViewerKey> select_valid_viewers(const std::vector<PlaybackRecord>& records,
                                         double min_total_s = 300.0);

/// Records belonging to valid viewers only.
std::vector<PlaybackRecord> keep_viewers(const std::vector<PlaybackRecord>& records,
                                         const std::set<ViewerKey>& viewers);

/// Clips each record to [0, limit_s]; records that end up empty are dropped.
std::vector<PlaybackRecord> clip_records(const std::vector<PlaybackRecord>& records,
                                         double limit_s = kLessonLengthS);

struct LessonStats {
    std::string lesson_id;
    std::size_t valid_viewers = 0;
    double total_viewing_min = 0.0;
};

/// Per-lesson valid-viewer count and total valid viewing time, ordered by
/// lesson id (natural order, so L2 precedes L10).
std::vector<LessonStats> lesson_statistics(const std::vector<PlaybackRecord>& parsed,
                                           double min_record_s = 60.0,
                                           double min_total_s = 300.0);

/// Natural-order comparison: digit runs compare numerically.
bool natural_less(const std::string& a, const std::string& b);

}  // namespace attn::logs
