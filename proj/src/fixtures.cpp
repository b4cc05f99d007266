#include "attn/fixtures.hpp"

#include "attn/error.hpp"
#include "attn/fusion_model.hpp"
#include "attn/labeling.hpp"
#include "attn/layout.hpp"
#include "attn/rng.hpp"
#include "attn/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

namespace attn::fixtures {
namespace {

namespace fs = std::filesystem;

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

void write_records_csv(const fs::path& path, const std::vector<logs::PlaybackRecord>& records,
                       const std::vector<std::string>& extra_rows = {}) {
    auto out = open_out(path);
    out << "viewer_id,lesson_id,start_s,end_s\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g\n", r.viewer_id.c_str(), r.lesson_id.c_str(), r.start_s,
                      r.end_s);
        out << buf;
    }
    for (const auto& row : extra_rows) out << row << '\n';
}

void write_map_lesson(const fs::path& out, const std::string& lesson, const std::vector<OracleSegment>& segs) {
    labeling::LabelSeries labels;
    labels.lesson_id = lesson;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const int idx = static_cast<int>(i);
        labels.raw_counts.push_back(0);
        labels.smoothed.push_back(segs[i].label);
        labels.normalized.push_back(segs[i].label);
        for (auto m : {Modality::action, Modality::slide, Modality::voice}) {
            fs::create_directories(layout::feature_dir(out, lesson, m));
        }
        write_png(layout::feature_png(out, lesson, Modality::action, idx), segs[i].action);
        write_png(layout::feature_png(out, lesson, Modality::slide, idx), segs[i].slide);
        write_png(layout::feature_png(out, lesson, Modality::voice, idx), segs[i].voice);
    }
    auto csv = open_out(layout::label_csv(out, lesson));
    labeling::write_label_csv(csv, labels);
}

void write_ini(const fs::path& dir, const std::string& body) {
    auto out = open_out(dir / "attn.ini");
    out << body;
}

}  // namespace

std::vector<logs::PlaybackRecord> table1_records(std::uint64_t seed) {
    Rng rng(mix(seed, 1));
    std::vector<logs::PlaybackRecord> records;
    const auto add = [&](const std::string& viewer, const std::string& lesson, double start, double duration) {
        records.push_back({viewer, lesson, start, start + duration});
    };
    const auto random_start = [&](double duration) {
        return static_cast<double>(rng.below(static_cast<std::uint64_t>(logs::kLessonLengthS - duration) + 1));
    };
    for (const auto& row : kTable1) {
        const std::string lesson = row.lesson;
        std::vector<int> minutes(static_cast<std::size_t>(row.valid_viewers), 6);
        for (int k = 0; k < row.total_minutes - 6 * row.valid_viewers; ++k) {
            minutes[rng.below(minutes.size())] += 1;
        }
        for (std::size_t v = 0; v < minutes.size(); ++v) {
            char id[16];
            std::snprintf(id, sizeof id, "stu%02zu", v + 1);
            int left = minutes[v];
            while (left > 0) {
                const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(left, 40))));
                add(id, lesson, random_start(len * 60.0), len * 60.0);
                left -= len;
            }
            if (v < 2) add(id, lesson, random_start(59.0), 10.0 + static_cast<double>(rng.below(50)));
        }
        add("guestA", lesson, random_start(300.0), 300.0);
        add("guestB", lesson, random_start(120.0), 120.0);
        add("guestB", lesson, random_start(150.0), 150.0);
        add("guestB", lesson, random_start(45.0), 45.0);
        for (int k = 0; k < 3; ++k) add("guestC", lesson, random_start(50.0), 50.0);
    }
    rng.shuffle(std::span<logs::PlaybackRecord>(records));
    return records;
}

std::vector<OracleSegment> oracle_lesson(std::uint64_t seed, int lesson_index, int segments, int height, int width) {
    Rng rng(mix(seed, 100 + static_cast<std::uint64_t>(lesson_index)));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double cycles = rng.uniform(1.5, 3.0);
    const double offset = rng.uniform(0.42, 0.58);
    const double amplitude = rng.uniform(0.36, 0.44);
    const int tile = (height % 20 == 0 && width % 20 == 0) ? 20 : ((height % 4 == 0 && width % 4 == 0) ? 4 : 1);
    const int tiles_y = height / tile, tiles_x = width / tile;
    const int tiles = tiles_y * tiles_x;
    std::vector<int> order(static_cast<std::size_t>(tiles));

    std::vector<OracleSegment> out;
    double slide_level = rng.uniform(0.0, 255.0);
    for (int i = 0; i < segments; ++i) {
        OracleSegment seg;
        const double t = std::clamp(
            offset + amplitude * std::sin(2.0 * std::numbers::pi * cycles * i / segments + phase) +
                0.03 * (rng.uniform() - 0.5),
            0.02, 0.98);
        const auto lit = static_cast<std::size_t>(std::lround(t * tiles));
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<int>(order));
        seg.action = GrayImage(height, width, 0);
        for (std::size_t k = 0; k < lit; ++k) {
            const int ty = order[k] / tiles_x, tx = order[k] % tiles_x;
            for (int y = ty * tile; y < (ty + 1) * tile; ++y) {
                for (int x = tx * tile; x < (tx + 1) * tile; ++x) seg.action.at(y, x) = 255;
            }
        }
        std::uint64_t sum = 0;
        for (auto p : seg.action.pixels) sum += p;
        seg.label = static_cast<double>(sum) / (255.0 * static_cast<double>(seg.action.pixels.size()));

        if (i % 5 == 0) slide_level = rng.uniform(0.0, 255.0);
        seg.slide = GrayImage(height, width, static_cast<std::uint8_t>(slide_level));

        seg.voice = GrayImage(height, width, 0);
        const double period = rng.uniform(8.0, 40.0);
        const double vphase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int y = 0; y < height; ++y) {
            const auto v = static_cast<std::uint8_t>(
                std::lround(127.5 + 127.5 * std::sin(2.0 * std::numbers::pi * y / period + vphase)));
            std::fill_n(seg.voice.pixels.begin() + static_cast<std::ptrdiff_t>(y) * width, width, v);
        }
        out.push_back(std::move(seg));
    }
    return out;
}

eval::Dataset oracle_dataset(std::uint64_t seed, int lessons, int segments, int height, int width) {
    eval::Dataset ds;
    for (int l = 0; l < lessons; ++l) {
        const std::string id = "L" + std::to_string(l + 1);
        auto& samples = ds[id];
        const auto segs = oracle_lesson(seed, l, segments, height, width);
        for (int i = 0; i < segments; ++i) {
            const auto& s = segs[static_cast<std::size_t>(i)];
            samples.push_back(fusion::fuse_feature_level({Modality::action, id, i, s.action},
                                                         {Modality::slide, id, i, s.slide},
                                                         {Modality::voice, id, i, s.voice}, s.label));
        }
    }
    return ds;
}

void write_table1_fixture(const fs::path& dir, std::uint64_t seed) {
    write_records_csv(dir / "logs" / "access_log.csv", table1_records(seed), {"guestD,Lesson-1,120,60"});
    write_ini(dir, "[paths]\nlogs = logs\nout = out\n");
}

void write_oracle_fixture(const fs::path& dir, std::uint64_t seed) {
    const fs::path out = dir / "out";
    for (int l = 0; l < 7; ++l) {
        write_map_lesson(out, "L" + std::to_string(l + 1), oracle_lesson(seed, l));
    }
    write_ini(dir, "[paths]\nout = out\n");
}

void write_tiny_fixture(const fs::path& dir, std::uint64_t seed) {
    write_map_lesson(dir / "out", "T1", oracle_lesson(seed, 0, 10));
    write_ini(dir, "[paths]\nout = out\n");
}

void write_raw_fixture(const fs::path& dir, std::uint64_t seed) {
    constexpr int kWidth = 96, kHeight = 64, kFps = 5;
    constexpr double kSeconds = 120.0;
    Rng rng(mix(seed, 7));
    std::vector<logs::PlaybackRecord> records;
    for (int l = 0; l < 2; ++l) {
        const std::string lesson = "R" + std::to_string(l + 1);

        // Frames: a textured instructor patch sweeping over a flat background,
        // flickering noise in the (masked) seating rows.
        const fs::path frame_dir = dir / "frames" / lesson;
        fs::create_directories(frame_dir);
        const int count = static_cast<int>(kSeconds) * kFps;
        const double sweep_period = 16.0 + 8.0 * l;
        std::ofstream pose = open_out(dir / "pose" / (lesson + ".jsonl"));
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / kFps;
            const double px = 18.0 + 40.0 * (0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * t / sweep_period));
            const double py = 12.0;
            GrayImage img(kHeight, kWidth, 30);
            for (int y = 0; y < 24; ++y) {
                for (int x = 0; x < 16; ++x) {
                    const double fx = x + (px - std::floor(px));
                    const double v = 150.0 + 60.0 * std::sin(fx * 0.9) * std::cos(y * 0.7);
                    const int ix = static_cast<int>(std::floor(px)) + x;
                    if (ix >= 0 && ix < kWidth) img.at(static_cast<int>(py) + y, ix) = static_cast<std::uint8_t>(v);
                }
            }
            for (int y = 52; y < kHeight; ++y) {
                for (int x = 0; x < kWidth; ++x) img.at(y, x) = static_cast<std::uint8_t>(rng.below(256));
            }
            char name[32];
            std::snprintf(name, sizeof name, "frame_%06d.pgm", i);
            write_pgm(frame_dir / name, img);
            if (i % kFps == 0) {
                nlohmann::json pts = nlohmann::json::array();
                pts.push_back({px, py, 0.9});
                pts.push_back({px + 15.0, py, 0.9});
                pts.push_back({px, py + 23.0, 0.8});
                pts.push_back({px + 15.0, py + 23.0, 0.8});
                pts.push_back({px + 7.0, py + 10.0, 0.1});
                pose << nlohmann::json{{"t", t}, {"points", pts}}.dump() << '\n';
            }
        }
        std::ofstream manifest = open_out(frame_dir / "manifest.json");
        manifest << nlohmann::json{{"fps", kFps}, {"pattern", "frame_%06d.pgm"}, {"count", count}}.dump(2) << '\n';

        wav::Audio audio;
        audio.sample_rate_hz = 44100;
        audio.samples.resize(static_cast<std::size_t>(kSeconds * audio.sample_rate_hz));
        const double f0 = 180.0 + 40.0 * l;
        for (std::size_t n = 0; n < audio.samples.size(); ++n) {
            const double t = static_cast<double>(n) / audio.sample_rate_hz;
            const double envelope = std::fmod(t, 2.0) < 1.2 ? 1.0 : 0.1;
            audio.samples[n] = static_cast<float>(0.3 * envelope * std::sin(2.0 * std::numbers::pi * f0 * t) +
                                                  0.05 * std::sin(2.0 * std::numbers::pi * 1000.0 * t));
        }
        fs::create_directories(dir / "audio");
        wav::write_pcm16(dir / "audio" / (lesson + ".wav"), audio);

        std::ofstream slides = open_out(dir / "slides" / (lesson + ".csv"));
        slides << "timestamp_s,page\n0,1\n40," << 2 + l << "\n100," << 3 + l << "\n400,2\n700," << 6 + l << "\n";

        for (int v = 0; v < 4 + l; ++v) {
            const std::string viewer = "v" + std::to_string(v + 1);
            records.push_back({viewer, lesson, 0.0, 90.0 + 30.0 * v});
            records.push_back({viewer, lesson, 30.0, 400.0 + 20.0 * v});
            records.push_back({viewer, lesson, 200.0, 215.0});
        }
    }
    write_records_csv(dir / "logs" / "access_log.csv", records);
    write_ini(dir,
              "[paths]\nlogs = logs\naudio = audio\nframes = frames\npose = pose\nslides = slides\nout = out\n\n"
              "[action]\nframe_stride = 5\nmask = 0,52,96,12\n");
}

void write_fixture(const std::string& kind, const fs::path& dir, std::uint64_t seed) {
    fs::create_directories(dir);
    if (kind == "table1") write_table1_fixture(dir, seed);
    else if (kind == "oracle") write_oracle_fixture(dir, seed);
    else if (kind == "tiny") write_tiny_fixture(dir, seed);
    else if (kind == "raw") write_raw_fixture(dir, seed);
    else throw InputError("unknown fixture kind '" + kind + "' (expected table1|oracle|tiny|raw)");
}

}  // namespace attn::fixtures
