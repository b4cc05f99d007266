#include "attn/error.hpp"
#include "attn/fixtures.hpp"
#include "attn/log_ingest.hpp"
#include "attn/rng.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace attn;
using namespace attn::logs;

namespace {

ParseResult parse(const std::string& text) {
    std::istringstream in(text);
    return parse_playback_log(in);
}

std::vector<PlaybackRecord> with_durations(std::initializer_list<double> durations) {
    std::vector<PlaybackRecord> out;
    for (double d : durations) out.push_back({"s1", "L1", 0.0, d});
    return out;
}

}  // namespace

TEST_CASE("parse: single row maps fields directly") {
    const auto r = parse("viewer_id,lesson_id,start_s,end_s\ns1,L1,0,120\n");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0] == PlaybackRecord{"s1", "L1", 0.0, 120.0});
    CHECK(r.rejections.empty());
}

TEST_CASE("parse: header only gives no records") {
    const auto r = parse("viewer_id,lesson_id,start_s,end_s\n");
    CHECK(r.records.empty());
    CHECK(r.rejections.empty());
}

TEST_CASE("parse: reversed interval is rejected, not fatal") {
    const auto r = parse("viewer_id,lesson_id,start_s,end_s\ns1,L1,120,60\n");
    CHECK(r.records.empty());
    REQUIRE(r.rejections.size() == 1);
    CHECK(r.rejections[0].line == 2);
    CHECK(r.rejection_report().find("InvalidInterval") != std::string::npos);
}

TEST_CASE("parse: structural errors carry the line number") {
    try {
        parse("viewer_id,lesson_id,start_s,end_s\ns1,L1,0,60\ns2,L1,abc,90\n");
        FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("viewer,lesson,a,b\n"), MalformedRow);
    CHECK_THROWS_AS(parse(""), MalformedRow);
    CHECK_THROWS_AS(parse("viewer_id,lesson_id,start_s,end_s\ns1,L1,0\n"), MalformedRow);
}

TEST_CASE("parse: CRLF line endings") {
    const auto r = parse("viewer_id,lesson_id,start_s,end_s\r\ns1,L1,0,61.5\r\n");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].end_s == 61.5);
}

TEST_CASE("filter_valid_records keeps exactly-one-minute records") {
    const auto kept = filter_valid_records(with_durations({59.9, 60.0, 300.0}));
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].duration() == 60.0);
    CHECK(kept[1].duration() == 300.0);
    CHECK(filter_valid_records({}).empty());
    CHECK(filter_valid_records(with_durations({30, 30, 30})).empty());
}

TEST_CASE("filter_valid_records is idempotent") {
    Rng rng(3);
    std::vector<PlaybackRecord> recs;
    for (int i = 0; i < 200; ++i) recs.push_back({"v", "L", 0.0, rng.uniform(1.0, 200.0)});
    const auto once = filter_valid_records(recs);
    CHECK(filter_valid_records(once) == once);
}

TEST_CASE("select_valid_viewers uses a strict five-minute bound") {
    std::vector<PlaybackRecord> recs{{"a", "L1", 0, 120}, {"a", "L1", 200, 381}, {"b", "L1", 0, 300}};
    const auto valid = select_valid_viewers(recs);
    CHECK(valid.size() == 1);
    CHECK(valid.count({"a", "L1"}) == 1);
}

TEST_CASE("select_valid_viewers is monotone under added records") {
    Rng rng(11);
    std::vector<PlaybackRecord> recs;
    for (int i = 0; i < 60; ++i) {
        recs.push_back({"v" + std::to_string(rng.below(12)), "L" + std::to_string(rng.below(3)), 0.0,
                        rng.uniform(60.0, 200.0)});
        const auto before = select_valid_viewers(std::vector<PlaybackRecord>(recs.begin(), recs.end() - 1));
        const auto after = select_valid_viewers(recs);
        for (const auto& k : before) CHECK(after.count(k) == 1);
    }
}

TEST_CASE("clip_records trims to the lesson length and drops empty records") {
    const auto clipped = clip_records({{"a", "L", 5600, 5800}, {"a", "L", 5700, 5900}});
    REQUIRE(clipped.size() == 1);
    CHECK(clipped[0].end_s == kLessonLengthS);
}

TEST_CASE("natural_less orders digit runs numerically") {
    CHECK(natural_less("L2", "L10"));
    CHECK_FALSE(natural_less("L10", "L2"));
    CHECK(natural_less("Lesson-1", "Lesson-7"));
}

TEST_CASE("table1 fixture: valid viewers and their totals match the designed table") {
    const auto records = fixtures::table1_records(42);
    const auto stats = lesson_statistics(records);
    REQUIRE(stats.size() == fixtures::kTable1.size());
    const auto valid = filter_valid_records(records);
    const auto viewers = select_valid_viewers(valid);
    const auto totals = viewer_totals(keep_viewers(valid, viewers));
    std::map<std::string, double> seconds;
    for (const auto& [key, total] : totals) seconds[key.second] += total;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        CHECK(stats[i].lesson_id == fixtures::kTable1[i].lesson);
        CHECK(stats[i].valid_viewers == static_cast<std::size_t>(fixtures::kTable1[i].valid_viewers));
        CHECK(stats[i].total_viewing_min == fixtures::kTable1[i].total_minutes);
        CHECK(seconds[stats[i].lesson_id] == 60.0 * fixtures::kTable1[i].total_minutes);
    }
}

TEST_CASE("table1 fixture is a pure function of the seed") {
    CHECK(fixtures::table1_records(7) == fixtures::table1_records(7));
    CHECK_FALSE(fixtures::table1_records(7) == fixtures::table1_records(8));
}
