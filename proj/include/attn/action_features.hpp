#pragma once

#include "attn/error.hpp"
#include "attn/image.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace attn::action {

struct Frame {
    GrayImage image;
    double timestamp_s = 0.0;
};

/// Axis-aligned rectangle in pixels; pixels inside are excluded.
struct MaskRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};
using MaskSpec = std::vector<MaskRect>;

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
};

struct PoseKeypoints {
    double timestamp_s = 0.0;
    std::vector<Keypoint> points;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

enum class TrackStatus { tracked, lost, degenerate };

struct FlowResult {
    double dx = 0.0;
    double dy = 0.0;
    TrackStatus status = TrackStatus::tracked;
};

struct TrackSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Track {
    int point_id = 0;
    std::vector<TrackSample> positions;
    std::vector<TrackStatus> status;  // one per step after the seed position
};

class NoTrackablePoints : public Error {
public:
    NoTrackablePoints() : Error("no trackable points in frame") {}
};

/// Zeroes every pixel covered by a (clipped) mask rectangle.
GrayImage apply_mask(const GrayImage& frame, const MaskSpec& mask);

enum class SeedMode {
    pose_or_corners,  ///< confident pose keypoints when available, corners otherwise
    pose_and_corners  ///< pose keypoints plus corners
};

struct SeedOptions {
    double min_confidence = 0.3;
    int max_points = 50;
    double quality = 0.01;
    double min_distance = 10.0;
    SeedMode mode = SeedMode::pose_or_corners;
};

/// Shi-Tomasi corners: min eigenvalue of the 3x3-summed structure tensor,
/// thresholded at `quality` times the maximum, greedily thinned to
/// `min_distance`, strongest first.
std::vector<Point2> detect_corners(const GrayImage& frame, int max_points = 50, double quality = 0.01,
                                   double min_distance = 10.0);

/// Throws NoTrackablePoints when nothing can be seeded.
std::vector<Point2> seed_points(const PoseKeypoints* pose, const GrayImage& frame, const SeedOptions& options = {});

struct LkOptions {
    int window = 15;
    int max_iters = 10;
    double eps = 0.01;
    double min_eigenvalue = 1e-4;
};

/// Single-level iterative Lucas-Kanade.
std::vector<FlowResult> lucas_kanade(const GrayImage& prev, const GrayImage& next, const std::vector<Point2>& points,
                                     const LkOptions& options = {});

/// Tracks `seeds` through consecutive frames. Points are dropped at their
/// first lost or degenerate step; that step is recorded in `status`.
std::vector<Track> track_points(const std::vector<Frame>& frames, const std::vector<Point2>& seeds,
                                const LkOptions& options = {});

/// Draws each consecutive position pair as an anti-aliased line scaled to
/// h x w. The full-coverage intensity is 64 + min(191, round(16 |step|)),
/// partial coverage blends down towards 64; overlapping pixels keep the max.
GrayImage render_action_map(const std::vector<Track>& tracks, int src_height, int src_width, int h = kMapHeight,
                            int w = kMapWidth);

/// Frame directory description: `{"fps": .., "pattern": "frame_%06d.pgm", "count": .., "timestamps": [..]}`.
struct FrameManifest {
    std::filesystem::path directory;
    double fps = 30.0;
    std::string pattern;
    int count = 0;
    int start_index = 0;
    std::vector<double> timestamps;  // empty means index / fps

    double timestamp(int i) const;
    std::filesystem::path frame_path(int i) const;
};

FrameManifest load_manifest(const std::filesystem::path& manifest_json);

/// JSON Lines, one `{"t": seconds, "points": [[x, y, c], ...]}` per line.
std::vector<PoseKeypoints> load_pose_jsonl(const std::filesystem::path& path);

struct ActionOptions {
    int frame_stride = 6;
    double segment_length_s = 60.0;
    MaskSpec mask;
    SeedOptions seeds;
    LkOptions lk;
    int map_height = kMapHeight;
    int map_width = kMapWidth;
};

/// Frame indices of segment `index` sampled every `stride` frames.
std::vector<int> sampled_frame_indices(const FrameManifest& manifest, int index, int stride,
                                       double segment_length_s = 60.0);

/// Tracks for one segment: masks sampled frames, seeds from the pose sample
/// nearest the segment start (or corners), then tracks. Empty when nothing is
/// trackable or the segment has no frames.
std::vector<Track> segment_tracks(const FrameManifest& manifest, const std::vector<PoseKeypoints>& poses, int index,
                                  const ActionOptions& options);

GrayImage action_map_for_segment(const FrameManifest& manifest, const std::vector<PoseKeypoints>& poses, int index,
                                 const ActionOptions& options);

}  // namespace attn::action
