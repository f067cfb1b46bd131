#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaze_events/csv.hpp"
#include "gaze_events/session.hpp"

namespace gaze {

inline constexpr std::array<const char*, 14> kSessionColumns = {
    "timestamp_ms", "gaze_origin_x", "gaze_origin_y", "gaze_origin_z",
    "gaze_dir_x",   "gaze_dir_y",    "gaze_dir_z",    "headset_x",
    "headset_y",    "headset_z",     "pupil_left_mm", "pupil_right_mm",
    "openness_left", "openness_right"};

inline std::string session_csv_header() {
    std::string h;
    for (std::size_t i = 0; i < kSessionColumns.size(); ++i) {
        if (i) h += ',';
        h += kSessionColumns[i];
    }
    return h;
}

/// Parse the session CSV format. Rows are preserved in file order; empty
/// cells become missing fields. A field group (gaze, headset) counts as
/// present only when all of its cells are present.
inline std::vector<GazeSample> parse_session_samples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty session file");
    const auto header = csv::split_line(line);
    for (const char* want : kSessionColumns) {
        bool found = false;
        for (const auto& got : header)
            if (got == want) { found = true; break; }
        if (!found) throw FormatError(std::string("missing column '") + want + "' in header");
    }
    if (header.size() != kSessionColumns.size())
        throw FormatError("unexpected extra columns in header");
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != kSessionColumns[i])
            throw FormatError("column order mismatch at '" + header[i] + "'");

    std::vector<GazeSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != kSessionColumns.size())
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(kSessionColumns.size()) + " cells, got " +
                              std::to_string(cells.size()));
        auto cell = [&](std::size_t i) { return csv::parse_cell(cells[i], line_no, kSessionColumns[i]); };

        GazeSample s;
        const auto ts = cell(0);
        if (!ts)
            throw FormatError("line " + std::to_string(line_no) + ": empty timestamp_ms");
        s.timestamp_ms = *ts;
        const auto ox = cell(1), oy = cell(2), oz = cell(3);
        const auto dx = cell(4), dy = cell(5), dz = cell(6);
        const auto hx = cell(7), hy = cell(8), hz = cell(9);
        if (ox && oy && oz) s.gaze_origin = Vec3{*ox, *oy, *oz};
        if (dx && dy && dz) {
            const Vec3 d{*dx, *dy, *dz};
            if (norm2(d) > 0.0) s.gaze_direction = d; // zero vector = dropout
        }
        if (hx && hy && hz) s.headset_position = Vec3{*hx, *hy, *hz};
        s.pupil_left_mm = cell(10);
        s.pupil_right_mm = cell(11);
        s.openness_left = cell(12);
        s.openness_right = cell(13);
        samples.push_back(s);
    }
    return samples;
}

inline std::vector<GazeSample> parse_session_samples(const std::string& text) {
    std::istringstream in(text);
    return parse_session_samples(in);
}

inline void write_session_csv(std::ostream& out, const std::vector<GazeSample>& samples) {
    out << session_csv_header() << '\n';
    for (const GazeSample& s : samples) {
        out << csv::fmt(s.timestamp_ms) << ',';
        if (s.gaze_origin)
            out << csv::fmt(s.gaze_origin->x) << ',' << csv::fmt(s.gaze_origin->y) << ','
                << csv::fmt(s.gaze_origin->z) << ',';
        else
            out << ",,,";
        if (s.gaze_direction)
            out << csv::fmt(s.gaze_direction->x) << ',' << csv::fmt(s.gaze_direction->y) << ','
                << csv::fmt(s.gaze_direction->z) << ',';
        else
            out << ",,,";
        if (s.headset_position)
            out << csv::fmt(s.headset_position->x) << ',' << csv::fmt(s.headset_position->y)
                << ',' << csv::fmt(s.headset_position->z) << ',';
        else
            out << ",,,";
        out << csv::fmt(s.pupil_left_mm) << ',' << csv::fmt(s.pupil_right_mm) << ','
            << csv::fmt(s.openness_left) << ',' << csv::fmt(s.openness_right) << '\n';
    }
}

struct FillStats {
    std::size_t filled_gaze{0};
    std::size_t filled_headset{0};
    std::size_t dropped_leading{0};
};

/// Repair missing data with the last valid value. Gaze origin and direction
/// travel as one group (blinks blank them together), headset position as
/// another. Leading samples with no valid predecessor are dropped. Filled
/// fields are bitwise copies of earlier samples.
inline FillStats fill_missing(std::vector<GazeSample>& samples) {
    FillStats stats;
    std::optional<Vec3> last_origin, last_direction, last_headset;
    std::vector<GazeSample> out;
    out.reserve(samples.size());
    for (GazeSample s : samples) {
        if (s.gaze_valid()) {
            last_origin = s.gaze_origin;
            last_direction = s.gaze_direction;
        } else if (last_origin) {
            s.gaze_origin = last_origin;
            s.gaze_direction = last_direction;
            ++stats.filled_gaze;
        } else {
            ++stats.dropped_leading;
            continue;
        }
        if (s.headset_valid()) {
            last_headset = s.headset_position;
        } else if (last_headset) {
            s.headset_position = last_headset;
            ++stats.filled_headset;
        } else {
            ++stats.dropped_leading;
            continue;
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw EmptySessionError("no valid samples in session");
    samples = std::move(out);
    return stats;
}

/// Right-handed tracker convention to the left-handed scene convention:
/// negate the X component of gaze origin and direction. Involution.
inline void convert_handedness(std::vector<GazeSample>& samples) {
    for (GazeSample& s : samples) {
        if (s.gaze_origin) s.gaze_origin->x = -s.gaze_origin->x;
        if (s.gaze_direction) s.gaze_direction->x = -s.gaze_direction->x;
    }
}

/// Eye-local gaze origins to world space by adding the headset position.
inline void offset_origin(std::vector<GazeSample>& samples) {
    for (GazeSample& s : samples) {
        if (!s.gaze_origin || !s.headset_position)
            throw ContractError("offset_origin(): run fill_missing first");
        *s.gaze_origin += *s.headset_position;
    }
}

/// One 3D gaze point per sample: the intersection of the world-space gaze
/// ray with the scene.
inline std::vector<GazePoint> raycast_points(const std::vector<GazeSample>& samples,
                                             const SceneGeometry& scene) {
    std::vector<GazePoint> points;
    points.reserve(samples.size());
    for (const GazeSample& s : samples) {
        if (!s.gaze_valid())
            throw ContractError("raycast_points(): sample missing gaze fields");
        GazePoint p;
        p.timestamp_ms = s.timestamp_ms;
        p.origin = *s.gaze_origin;
        p.direction = normalized(*s.gaze_direction);
        p.position = ray_scene_intersection(Ray{p.origin, p.direction}, scene);
        points.push_back(p);
    }
    return points;
}

struct VelocityOptions {
    // (180/pi) * 1e3 converts radians-per-millisecond to degrees-per-second.
    // paper_constant switches to the published literal 5.73e4.
    bool paper_constant = false;

    double constant() const { return paper_constant ? 5.73e4 : kRadToDeg * 1e3; }
};

/// Point-to-point angular velocities in deg/s from consecutive gaze
/// directions and millisecond timestamps. The last point copies its
/// predecessor's velocity so every point carries one.
inline void compute_velocities(std::vector<GazePoint>& points,
                               const VelocityOptions& opt = {}) {
    if (points.size() < 2)
        throw ContractError("compute_velocities(): need at least 2 points");
    const double k = opt.constant();
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double dt = points[i + 1].timestamp_ms - points[i].timestamp_ms;
        if (!(dt > 0.0))
            throw DegenerateTimestepError(
                "non-increasing timestamp at sample " + std::to_string(i + 1), i + 1);
        const double angle = angle_between_rad(points[i].direction, points[i + 1].direction);
        points[i].velocity_deg_s = angle / dt * k;
    }
    points.back().velocity_deg_s = points[points.size() - 2].velocity_deg_s;
}

struct PreprocessOptions {
    VelocityOptions velocity;
};

/// Full ingest pipeline: fill, handedness conversion, camera offset,
/// ray-casting, velocities. Consumes raw samples, returns a classifier-ready
/// session.
inline Session preprocess(std::vector<GazeSample> samples, const SceneGeometry& scene,
                          const PreprocessOptions& opt = {}, FillStats* stats_out = nullptr) {
    Session session;
    const FillStats stats = fill_missing(samples);
    if (stats_out) *stats_out = stats;
    convert_handedness(samples);
    offset_origin(samples);
    session.points = raycast_points(samples, scene);
    compute_velocities(session.points, opt.velocity);
    session.samples = std::move(samples);
    session.scene = scene;
    return session;
}

} // namespace gaze
