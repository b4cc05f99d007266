#include "attn/log_ingest.hpp"

#include "attn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string_view>

namespace attn::logs {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_real(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

std::string ParseResult::rejection_report() const {
    std::ostringstream os;
    os << "accepted " << records.size() << " rejected " << rejections.size() << '\n';
    for (const auto& r : rejections) {
        os << "line " << r.line << ": " << r.reason << '\n';
    }
    return os.str();
}

ParseResult parse_playback_log(std::istream& source) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (!saw_header) {
            if (fields.size() != 4 || trim(fields[0]) != "viewer_id" || trim(fields[1]) != "lesson_id" ||
                trim(fields[2]) != "start_s" || trim(fields[3]) != "end_s") {
                throw MalformedRow(line_no, "expected header viewer_id,lesson_id,start_s,end_s");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw MalformedRow(line_no, "expected 4 columns, found " + std::to_string(fields.size()));
        }
        PlaybackRecord rec;
        rec.viewer_id = std::string(trim(fields[0]));
        rec.lesson_id = std::string(trim(fields[1]));
        if (rec.viewer_id.empty() || rec.lesson_id.empty()) {
            throw MalformedRow(line_no, "empty viewer_id or lesson_id");
        }
        if (!parse_real(fields[2], rec.start_s) || !parse_real(fields[3], rec.end_s)) {
            throw MalformedRow(line_no, "non-numeric playback offset");
        }
        if (rec.end_s <= rec.start_s) {
            result.rejections.push_back({line_no, "InvalidInterval: end_s <= start_s"});
            continue;
        }
        if (rec.start_s < 0.0) {
            result.rejections.push_back({line_no, "InvalidInterval: start_s < 0"});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    if (!saw_header) {
        throw MalformedRow(line_no == 0 ? 1 : line_no, "missing header row");
    }
    return result;
}

std::vector<PlaybackRecord> filter_valid_records(const std::vector<PlaybackRecord>& records,
                                                 double min_record_s) {
    std::vector<PlaybackRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const PlaybackRecord& r) { return r.duration() >= min_record_s; });
    return out;
}

ViewerTotals viewer_totals(const std::vector<PlaybackRecord>& records) {
    ViewerTotals totals;
    for (const auto& r : records) {
        totals[{r.viewer_id, r.lesson_id}] += r.duration();
    }
    return totals;
}

std::set<ViewerKey> select_valid_viewers(const std::vector<PlaybackRecord>& records,
                                         double min_total_s) {
    std::set<ViewerKey> out;
    for (const auto& [key, total] : viewer_totals(records)) {
        if (total > min_total_s) out.insert(key);
    }
    return out;
}

std::vector<PlaybackRecord> keep_viewers(const std::vector<PlaybackRecord>& records,
                                         const std::set<ViewerKey>& viewers) {
    std::vector<PlaybackRecord> out;
    for (const auto& r : records) {
        if (viewers.contains({r.viewer_id, r.lesson_id})) out.push_back(r);
    }
    return out;
}

std::vector<PlaybackRecord> clip_records(const std::vector<PlaybackRecord>& records, double limit_s) {
    std::vector<PlaybackRecord> out;
    for (auto r : records) {
        r.start_s = std::clamp(r.start_s, 0.0, limit_s);
        r.end_s = std::clamp(r.end_s, 0.0, limit_s);
        if (r.end_s > r.start_s) out.push_back(std::move(r));
    }
    return out;
}

std::vector<LessonStats> lesson_statistics(const std::vector<PlaybackRecord>& parsed,
                                           double min_record_s, double min_total_s) {
    const auto valid = filter_valid_records(parsed, min_record_s);
    const auto viewers = select_valid_viewers(valid, min_total_s);
    const auto totals = viewer_totals(valid);

    std::map<std::string, LessonStats> by_lesson;
    for (const auto& r : parsed) {
        by_lesson[r.lesson_id].lesson_id = r.lesson_id;
    }
    for (const auto& key : viewers) {
        auto& s = by_lesson[key.second];
        s.valid_viewers += 1;
        s.total_viewing_min += totals.at(key) / 60.0;
    }
    std::vector<LessonStats> out;
    for (auto& [id, s] : by_lesson) out.push_back(std::move(s));
    std::sort(out.begin(), out.end(),
              [](const LessonStats& a, const LessonStats& b) { return natural_less(a.lesson_id, b.lesson_id); });
    return out;
}

bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            auto na = std::string_view(a).substr(i, ie - i);
            auto nb = std::string_view(b).substr(j, je - j);
            while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
            while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
    return a < b;
}

}  // namespace attn::logs
