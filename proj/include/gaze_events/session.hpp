#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaze_events/geometry.hpp"
#include "gaze_events/vec3.hpp"

namespace gaze {

// One raw tracker record. Gaze origin/direction and headset position arrive
// as optional groups: a blink blanks the gaze cells and the fill step
// repairs them before classification.
struct GazeSample {
    double timestamp_ms{0.0};
    std::optional<Vec3> gaze_origin;    // eye-local until offset_origin()
    std::optional<Vec3> gaze_direction; // unit after normalization
    std::optional<Vec3> headset_position;
    std::optional<double> pupil_left_mm;
    std::optional<double> pupil_right_mm;
    std::optional<double> openness_left;
    std::optional<double> openness_right;

    bool gaze_valid() const { return gaze_origin && gaze_direction; }
    bool headset_valid() const { return headset_position.has_value(); }
};

// Classifier input: a 3D scene-intersection point plus the world-space ray
// that produced it. Velocity is filled in by compute_velocities().
struct GazePoint {
    Vec3 position;
    double timestamp_ms{0.0};
    Vec3 origin;    // world-space eye position at that instant
    Vec3 direction; // unit
    std::optional<double> velocity_deg_s;
};

enum class TaskKind { SingleTarget, MultiTarget };

inline std::string to_string(TaskKind k) {
    return k == TaskKind::SingleTarget ? "single-target" : "multi-target";
}

struct Session {
    std::vector<GazeSample> samples;
    std::vector<GazePoint> points; // one per sample after preprocessing
    SceneGeometry scene;
    std::string protocol_id;
    TaskKind task_kind{TaskKind::SingleTarget};
};

} // namespace gaze
