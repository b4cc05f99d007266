#pragma once

#include "attn/evaluation.hpp"
#include "attn/image.hpp"
#include "attn/log_ingest.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Synthetic datasets. Every generator is a pure function of its seed.
namespace attn::fixtures {

struct Table1Row {
    const char* lesson;
    int valid_viewers;
    int total_minutes;
};

/// Valid viewers and total valid viewing time per lesson of the reference
/// course; the table1 fixture is built to reproduce these exactly.
inline constexpr std::array<Table1Row, 7> kTable1{{
    {"Lesson-1", 10, 532},
    {"Lesson-2", 6, 605},
    {"Lesson-3", 11, 647},
    {"Lesson-4", 8, 408},
    {"Lesson-5", 8, 607},
    {"Lesson-6", 9, 643},
    {"Lesson-7", 9, 939},
}};

/// Access-log records reproducing kTable1, mixed with records that every
/// filter must discard (sub-minute records, viewers at or under five minutes).
/// Rows are in shuffled order.
std::vector<logs::PlaybackRecord> table1_records(std::uint64_t seed);

/// The modality maps of one oracle segment. The label is the mean of the
/// action map divided by 255, so it is learnable from the R channel alone.
struct OracleSegment {
    GrayImage action, slide, voice;
    double label = 0.0;
};

/// Oracle lesson `lesson_index` (0-based): `segments` maps with a smooth
/// label curve that crosses all three attention zones.
std::vector<OracleSegment> oracle_lesson(std::uint64_t seed, int lesson_index, int segments = 95,
                                         int height = kMapHeight, int width = kMapWidth);

/// In-memory oracle dataset: lessons "L1".."L<lessons>".
eval::Dataset oracle_dataset(std::uint64_t seed, int lessons = 7, int segments = 95, int height = kMapHeight,
                             int width = kMapWidth);

/// Fixture kinds written by `attn fixtures`.
///   table1 - access logs (logs/access_log.csv)
///   oracle - labels and modality maps for 7 x 95 segments under out/
///   tiny   - labels and maps for one 10-segment lesson under out/
///   raw    - logs, frames, pose, audio and slide events for two short lessons
/// Each writes an attn.ini next to the data.
void write_fixture(const std::string& kind, const std::filesystem::path& dir, std::uint64_t seed = 42);

void write_table1_fixture(const std::filesystem::path& dir, std::uint64_t seed = 42);
void write_oracle_fixture(const std::filesystem::path& dir, std::uint64_t seed = 42);
void write_tiny_fixture(const std::filesystem::path& dir, std::uint64_t seed = 42);
void write_raw_fixture(const std::filesystem::path& dir, std::uint64_t seed = 42);

}  // namespace attn::fixtures
