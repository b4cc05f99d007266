#include "attn/action_features.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace attn::action {
namespace {

using json = nlohmann::json;

double sample(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double ax = x - x0, ay = y - y0;
    const double top = img.at(y0, x0) * (1 - ax) + img.at(y0, x1) * ax;
    const double bot = img.at(y1, x0) * (1 - ax) + img.at(y1, x1) * ax;
    return top * (1 - ay) + bot * ay;
}

bool inside(const GrayImage& img, double x, double y) {
    return x >= 0.0 && y >= 0.0 && x <= img.width - 1 && y <= img.height - 1;
}

double min_eigenvalue(double gxx, double gxy, double gyy) {
    const double mean = 0.5 * (gxx + gyy);
    const double diff = 0.5 * (gxx - gyy);
    return mean - std::sqrt(diff * diff + gxy * gxy);
}

struct LoadedSegment {
    std::vector<Frame> frames;
    int height = 0;
    int width = 0;
};

LoadedSegment load_segment(const FrameManifest& manifest, int index, const ActionOptions& options) {
    LoadedSegment seg;
    for (int i : sampled_frame_indices(manifest, index, options.frame_stride, options.segment_length_s)) {
        Frame f;
        f.image = apply_mask(read_gray_image(manifest.frame_path(i)), options.mask);
        f.timestamp_s = manifest.timestamp(i);
        if (!seg.frames.empty() && (f.image.height != seg.height || f.image.width != seg.width)) {
            throw ShapeMismatch("frame " + manifest.frame_path(i).string() + " differs in size from the lesson");
        }
        seg.height = f.image.height;
        seg.width = f.image.width;
        seg.frames.push_back(std::move(f));
    }
    return seg;
}

std::vector<Track> tracks_for(const LoadedSegment& seg, const std::vector<PoseKeypoints>& poses,
                              const ActionOptions& options) {
    if (seg.frames.empty()) return {};
    const double t0 = seg.frames.front().timestamp_s;
    const PoseKeypoints* nearest = nullptr;
    for (const auto& p : poses) {
        if (!nearest || std::abs(p.timestamp_s - t0) < std::abs(nearest->timestamp_s - t0)) nearest = &p;
    }
    std::vector<Point2> seeds;
    try {
        seeds = seed_points(nearest, seg.frames.front().image, options.seeds);
    } catch (const NoTrackablePoints&) {
        return {};
    }
    return track_points(seg.frames, seeds, options.lk);
}

}  // namespace

GrayImage apply_mask(const GrayImage& frame, const MaskSpec& mask) {
    GrayImage out = frame;
    for (const auto& r : mask) {
        const int x0 = std::clamp(r.x, 0, frame.width);
        const int y0 = std::clamp(r.y, 0, frame.height);
        const int x1 = std::clamp(r.x + r.w, 0, frame.width);
        const int y1 = std::clamp(r.y + r.h, 0, frame.height);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) out.at(y, x) = 0;
        }
    }
    return out;
}

std::vector<Point2> detect_corners(const GrayImage& frame, int max_points, double quality, double min_distance) {
    const int h = frame.height, w = frame.width;
    if (h < 5 || w < 5 || max_points <= 0) return {};
    std::vector<double> ix(static_cast<std::size_t>(h) * w, 0.0), iy(ix.size(), 0.0);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            ix[static_cast<std::size_t>(y) * w + x] = 0.5 * (frame.at(y, x + 1) - frame.at(y, x - 1));
            iy[static_cast<std::size_t>(y) * w + x] = 0.5 * (frame.at(y + 1, x) - frame.at(y - 1, x));
        }
    }
    std::vector<double> response(ix.size(), 0.0);
    double peak = 0.0;
    for (int y = 2; y < h - 2; ++y) {
        for (int x = 2; x < w - 2; ++x) {
            double gxx = 0, gxy = 0, gyy = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto k = static_cast<std::size_t>(y + dy) * w + (x + dx);
                    gxx += ix[k] * ix[k];
                    gxy += ix[k] * iy[k];
                    gyy += iy[k] * iy[k];
                }
            }
            const double r = min_eigenvalue(gxx, gxy, gyy);
            response[static_cast<std::size_t>(y) * w + x] = r;
            peak = std::max(peak, r);
        }
    }
    if (peak <= 0.0) return {};
    const double threshold = quality * peak;

    struct Candidate {
        double strength;
        int y, x;
    };
    std::vector<Candidate> candidates;
    for (int y = 2; y < h - 2; ++y) {
        for (int x = 2; x < w - 2; ++x) {
            const double r = response[static_cast<std::size_t>(y) * w + x];
            if (r < threshold || r <= 0.0) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (response[static_cast<std::size_t>(y + dy) * w + (x + dx)] > r) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) candidates.push_back({r, y, x});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.strength > b.strength; });
    std::vector<Point2> out;
    const double min_d2 = min_distance * min_distance;
    for (const auto& c : candidates) {
        const bool far = std::all_of(out.begin(), out.end(), [&](const Point2& p) {
            const double dx = p.x - c.x, dy = p.y - c.y;
            return dx * dx + dy * dy >= min_d2;
        });
        if (!far) continue;
        out.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
        if (static_cast<int>(out.size()) >= max_points) break;
    }
    return out;
}

std::vector<Point2> seed_points(const PoseKeypoints* pose, const GrayImage& frame, const SeedOptions& options) {
    std::vector<Point2> out;
    if (pose) {
        for (const auto& k : pose->points) {
            if (static_cast<int>(out.size()) >= options.max_points) break;
            if (k.confidence < options.min_confidence || !inside(frame, k.x, k.y)) continue;
            out.push_back({k.x, k.y});
        }
    }
    const bool want_corners = out.empty() || options.mode == SeedMode::pose_and_corners;
    if (want_corners && static_cast<int>(out.size()) < options.max_points) {
        const auto corners = detect_corners(frame, options.max_points - static_cast<int>(out.size()),
                                            options.quality, options.min_distance);
        out.insert(out.end(), corners.begin(), corners.end());
    }
    if (out.empty()) throw NoTrackablePoints();
    return out;
}

std::vector<FlowResult> lucas_kanade(const GrayImage& prev, const GrayImage& next, const std::vector<Point2>& points,
                                     const LkOptions& options) {
    if (prev.height != next.height || prev.width != next.width) {
        throw ShapeMismatch("Lucas-Kanade frames differ in size");
    }
    const int r = options.window / 2;
    const std::size_t n = static_cast<std::size_t>(2 * r + 1) * (2 * r + 1);
    std::vector<double> ref(n), gx(n), gy(n);
    std::vector<FlowResult> out;
    out.reserve(points.size());

    for (const auto& p : points) {
        FlowResult res;
        if (!inside(prev, p.x, p.y)) {
            res.status = TrackStatus::lost;
            out.push_back(res);
            continue;
        }
        double gxx = 0, gxy = 0, gyy = 0;
        std::size_t k = 0;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx, ++k) {
                const double qx = p.x + dx, qy = p.y + dy;
                ref[k] = sample(prev, qx, qy);
                gx[k] = 0.5 * (sample(prev, qx + 1, qy) - sample(prev, qx - 1, qy));
                gy[k] = 0.5 * (sample(prev, qx, qy + 1) - sample(prev, qx, qy - 1));
                gxx += gx[k] * gx[k];
                gxy += gx[k] * gy[k];
                gyy += gy[k] * gy[k];
            }
        }
        if (min_eigenvalue(gxx, gxy, gyy) < options.min_eigenvalue) {
            res.status = TrackStatus::degenerate;
            out.push_back(res);
            continue;
        }
        const double det = gxx * gyy - gxy * gxy;
        double dx_total = 0.0, dy_total = 0.0;
        for (int it = 0; it < options.max_iters; ++it) {
            double bx = 0, by = 0;
            k = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx, ++k) {
                    const double diff = ref[k] - sample(next, p.x + dx + dx_total, p.y + dy + dy_total);
                    bx += diff * gx[k];
                    by += diff * gy[k];
                }
            }
            const double ux = (gyy * bx - gxy * by) / det;
            const double uy = (gxx * by - gxy * bx) / det;
            dx_total += ux;
            dy_total += uy;
            if (!inside(next, p.x + dx_total, p.y + dy_total)) {
                res.status = TrackStatus::lost;
                break;
            }
            if (std::hypot(ux, uy) < options.eps) break;
        }
        res.dx = dx_total;
        res.dy = dy_total;
        out.push_back(res);
    }
    return out;
}

std::vector<Track> track_points(const std::vector<Frame>& frames, const std::vector<Point2>& seeds,
                                const LkOptions& options) {
    if (frames.empty()) return {};
    std::vector<Track> tracks(seeds.size());
    std::vector<std::size_t> alive;
    std::vector<Point2> current = seeds;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        tracks[i].point_id = static_cast<int>(i);
        tracks[i].positions.push_back({frames.front().timestamp_s, seeds[i].x, seeds[i].y});
        alive.push_back(i);
    }
    for (std::size_t f = 1; f < frames.size() && !alive.empty(); ++f) {
        std::vector<Point2> query;
        for (auto id : alive) query.push_back(current[id]);
        const auto flow = lucas_kanade(frames[f - 1].image, frames[f].image, query, options);
        std::vector<std::size_t> still;
        for (std::size_t j = 0; j < alive.size(); ++j) {
            auto& tr = tracks[alive[j]];
            tr.status.push_back(flow[j].status);
            if (flow[j].status != TrackStatus::tracked) continue;
            auto& pt = current[alive[j]];
            pt.x += flow[j].dx;
            pt.y += flow[j].dy;
            tr.positions.push_back({frames[f].timestamp_s, pt.x, pt.y});
            still.push_back(alive[j]);
        }
        alive = std::move(still);
    }
    return tracks;
}

GrayImage render_action_map(const std::vector<Track>& tracks, int src_height, int src_width, int h, int w) {
    GrayImage map(h, w, 0);
    const double sx = static_cast<double>(w) / src_width;
    const double sy = static_cast<double>(h) / src_height;
    const auto plot = [&](int x, int y, double value) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        auto& px = map.at(y, x);
        px = std::max<std::uint8_t>(px, static_cast<std::uint8_t>(std::lround(value)));
    };
    const auto put = [&](int x, int y, int intensity, double coverage) {
        if (coverage <= 0.0) return;
        plot(x, y, 64.0 + (intensity - 64) * std::min(coverage, 1.0));
    };

    for (const auto& tr : tracks) {
        for (std::size_t k = 0; k < tr.positions.size(); ++k) {
            const auto& a = tr.positions[k];
            const auto& b = k + 1 < tr.positions.size() ? tr.positions[k + 1] : a;
            if (k + 1 == tr.positions.size() && tr.positions.size() > 1) break;
            const double step = std::hypot(b.x - a.x, b.y - a.y);
            const int intensity = 64 + static_cast<int>(std::min(191L, std::lround(step * 16.0)));
            const double ax = (a.x + 0.5) * sx - 0.5, ay = (a.y + 0.5) * sy - 0.5;
            const double bx = (b.x + 0.5) * sx - 0.5, by = (b.y + 0.5) * sy - 0.5;
            const double ddx = bx - ax, ddy = by - ay;
            if (std::abs(ddx) < 1e-12 && std::abs(ddy) < 1e-12) {
                put(static_cast<int>(std::lround(ax)), static_cast<int>(std::lround(ay)), intensity, 1.0);
                continue;
            }
            const bool steep = std::abs(ddy) > std::abs(ddx);
            // Walk along the major axis; split coverage across the two
            // pixels straddling the minor coordinate.
            double m0 = steep ? ay : ax, m1 = steep ? by : bx;
            double n0 = steep ? ax : ay, n1 = steep ? bx : by;
            if (m0 > m1) {
                std::swap(m0, m1);
                std::swap(n0, n1);
            }
            const double slope = (n1 - n0) / (m1 - m0);
            for (long m = std::lround(m0); m <= std::lround(m1); ++m) {
                const double n = n0 + slope * (static_cast<double>(m) - m0);
                const double base = std::floor(n);
                const double frac = n - base;
                const int mi = static_cast<int>(m), ni = static_cast<int>(base);
                if (steep) {
                    put(ni, mi, intensity, 1.0 - frac);
                    put(ni + 1, mi, intensity, frac);
                } else {
                    put(mi, ni, intensity, 1.0 - frac);
                    put(mi, ni + 1, intensity, frac);
                }
            }
        }
    }
    return map;
}

double FrameManifest::timestamp(int i) const {
    if (!timestamps.empty()) return timestamps.at(static_cast<std::size_t>(i));
    return static_cast<double>(i) / fps;
}

std::filesystem::path FrameManifest::frame_path(int i) const {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern.c_str(), start_index + i);
    return directory / buf;
}

FrameManifest load_manifest(const std::filesystem::path& manifest_json) {
    std::ifstream in(manifest_json);
    if (!in) throw InputError("cannot open frame manifest " + manifest_json.string());
    FrameManifest m;
    try {
        const auto j = json::parse(in);
        m.directory = manifest_json.parent_path();
        m.fps = j.at("fps").get<double>();
        m.pattern = j.at("pattern").get<std::string>();
        m.count = j.at("count").get<int>();
        m.start_index = j.value("start_index", 0);
        if (j.contains("timestamps")) m.timestamps = j.at("timestamps").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError("bad frame manifest " + manifest_json.string() + ": " + e.what());
    }
    if (m.fps <= 0 || m.count < 0 || (!m.timestamps.empty() && static_cast<int>(m.timestamps.size()) != m.count)) {
        throw InputError("inconsistent frame manifest " + manifest_json.string());
    }
    if (m.pattern.find('%') == std::string::npos) {
        throw InputError("frame manifest pattern needs a printf index field: " + m.pattern);
    }
    return m;
}

std::vector<PoseKeypoints> load_pose_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open pose file " + path.string());
    std::vector<PoseKeypoints> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            PoseKeypoints p;
            p.timestamp_s = j.at("t").get<double>();
            for (const auto& pt : j.at("points")) {
                if (pt.size() != 3) throw MalformedRow(line_no, "pose point must be [x, y, c]");
                p.points.push_back({pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
            }
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw MalformedRow(line_no, std::string("bad pose line: ") + e.what());
        }
    }
    return out;
}

std::vector<int> sampled_frame_indices(const FrameManifest& manifest, int index, int stride,
                                       double segment_length_s) {
    if (stride < 1) throw Error("frame stride must be positive");
    const double lo = segment_length_s * index;
    const double hi = lo + segment_length_s;
    std::vector<int> in_segment;
    for (int i = 0; i < manifest.count; ++i) {
        const double t = manifest.timestamp(i);
        if (t >= lo && t < hi) in_segment.push_back(i);
    }
    std::vector<int> out;
    for (std::size_t k = 0; k < in_segment.size(); k += static_cast<std::size_t>(stride)) out.push_back(in_segment[k]);
    return out;
}

std::vector<Track> segment_tracks(const FrameManifest& manifest, const std::vector<PoseKeypoints>& poses, int index,
                                  const ActionOptions& options) {
    return tracks_for(load_segment(manifest, index, options), poses, options);
}

GrayImage action_map_for_segment(const FrameManifest& manifest, const std::vector<PoseKeypoints>& poses, int index,
                                 const ActionOptions& options) {
    const auto seg = load_segment(manifest, index, options);
    if (seg.frames.empty()) return GrayImage(options.map_height, options.map_width, 0);
    return render_action_map(tracks_for(seg, poses, options), seg.height, seg.width, options.map_height,
                             options.map_width);
}

}  // namespace attn::action
