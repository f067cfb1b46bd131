#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gaze_events/geometry.hpp"
#include "gaze_events/rng.hpp"
#include "gaze_events/session.hpp"

namespace gaze {

struct StimulusTarget {
    Vec3 position;
    double onset_ms{0.0};
    double dwell_ms{0.0};
};

// Ground truth for metrics and input to the simulator: the ordered sequence
// of intended fixations, plus the scene the gaze rays are cast against.
struct StimulusProtocol {
    std::vector<StimulusTarget> targets;
    SceneGeometry scene;
    TaskKind task_kind{TaskKind::SingleTarget};
    Vec3 viewer_origin{0.0, 1.2, 0.0}; // nominal eye position for amplitudes

    double end_ms() const {
        return targets.empty() ? 0.0 : targets.back().onset_ms + targets.back().dwell_ms;
    }
    double total_dwell_ms() const {
        double sum = 0.0;
        for (const auto& t : targets) sum += t.dwell_ms;
        return sum;
    }
};

struct StimulusSaccade {
    std::size_t from_index{0};
    std::size_t to_index{0};
    double amplitude_deg{0.0};
    bool degenerate{false}; // coincident targets
};

/// One stimulus saccade per consecutive target pair; amplitudes are visual
/// angles from the viewer origin.
inline std::vector<StimulusSaccade> stimulus_saccades(const StimulusProtocol& p) {
    std::vector<StimulusSaccade> out;
    for (std::size_t i = 0; i + 1 < p.targets.size(); ++i) {
        StimulusSaccade s;
        s.from_index = i;
        s.to_index = i + 1;
        s.amplitude_deg = angle_at_origin(p.viewer_origin, p.targets[i].position,
                                          p.targets[i + 1].position);
        s.degenerate = !(s.amplitude_deg > 0.0);
        out.push_back(s);
    }
    return out;
}

struct ProtocolOptions {
    TaskKind task_kind{TaskKind::SingleTarget};
    std::uint64_t seed{1};
    std::size_t n_targets{20}; // position changes (single) / sphere count (multi)
    double dwell_ms{1500.0};
    Vec3 cube_center{0.0, 1.2, 2.2};
    double cube_side{1.6};
    double sphere_radius{0.05};
    Vec3 viewer_origin{0.0, 1.2, 0.0};
    SceneGeometry room{}; // spheres are filled in by the generator
};

/// Stimulus generator for the two session protocols. Single-target: one
/// sphere starts at the vision center and jumps n_targets times to uniform
/// positions in the cube. Multi-target: n_targets fixed spheres (central
/// start sphere plus uniform distractors) activate once each in a seeded
/// order starting from the central one. Identical seeds give identical
/// protocols.
inline StimulusProtocol generate_protocol(const ProtocolOptions& opt) {
    if (opt.n_targets < 2)
        throw InvalidConfigurationError("generate_protocol: need at least 2 targets");
    const Vec3 half{opt.cube_side / 2.0, opt.cube_side / 2.0, opt.cube_side / 2.0};
    const Vec3 lo = opt.cube_center - half;
    const Vec3 hi = opt.cube_center + half;
    if (!opt.room.contains(lo) || !opt.room.contains(hi))
        throw InvalidConfigurationError("generate_protocol: stimulus cube extends outside the room");

    Rng rng(opt.seed);
    auto draw = [&]() {
        return Vec3{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
    };

    std::vector<Vec3> order;
    if (opt.task_kind == TaskKind::SingleTarget) {
        order.push_back(opt.cube_center);
        for (std::size_t i = 0; i < opt.n_targets; ++i) order.push_back(draw());
    } else {
        std::vector<Vec3> spheres;
        spheres.push_back(opt.cube_center);
        for (std::size_t i = 1; i < opt.n_targets; ++i) spheres.push_back(draw());
        std::vector<std::size_t> rest(spheres.size() - 1);
        for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = i + 1;
        rng.shuffle(rest);
        order.push_back(spheres[0]);
        for (std::size_t i : rest) order.push_back(spheres[i]);
    }

    StimulusProtocol p;
    p.task_kind = opt.task_kind;
    p.viewer_origin = opt.viewer_origin;
    p.scene = opt.room;
    double onset = 0.0;
    for (const Vec3& pos : order) {
        p.targets.push_back({pos, onset, opt.dwell_ms});
        onset += opt.dwell_ms;
    }
    // every target position is a sphere in the ray-cast scene
    if (opt.task_kind == TaskKind::SingleTarget) {
        for (const Vec3& pos : order) p.scene.spheres.push_back({pos, opt.sphere_radius});
    } else {
        std::vector<Vec3> unique = order; // activation order == sphere set here
        for (const Vec3& pos : unique) p.scene.spheres.push_back({pos, opt.sphere_radius});
    }
    return p;
}

// --- JSON (de)serialization -------------------------------------------------

inline nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw FormatError("expected [x,y,z] array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json to_json(const StimulusProtocol& p) {
    nlohmann::json j;
    j["task_kind"] = to_string(p.task_kind);
    j["viewer_origin"] = to_json(p.viewer_origin);
    j["room"] = {{"min", to_json(p.scene.room_min)}, {"max", to_json(p.scene.room_max)}};
    j["spheres"] = nlohmann::json::array();
    for (const Sphere& s : p.scene.spheres)
        j["spheres"].push_back({{"center", to_json(s.center)}, {"radius", s.radius}});
    j["targets"] = nlohmann::json::array();
    for (const StimulusTarget& t : p.targets)
        j["targets"].push_back({{"position", to_json(t.position)},
                                {"onset_ms", t.onset_ms},
                                {"dwell_ms", t.dwell_ms}});
    return j;
}

inline StimulusProtocol protocol_from_json(const nlohmann::json& j) {
    StimulusProtocol p;
    const std::string kind = j.at("task_kind").get<std::string>();
    if (kind == "single-target")
        p.task_kind = TaskKind::SingleTarget;
    else if (kind == "multi-target")
        p.task_kind = TaskKind::MultiTarget;
    else
        throw FormatError("unknown task_kind '" + kind + "'");
    p.viewer_origin = vec3_from_json(j.at("viewer_origin"));
    p.scene.room_min = vec3_from_json(j.at("room").at("min"));
    p.scene.room_max = vec3_from_json(j.at("room").at("max"));
    for (const auto& s : j.at("spheres"))
        p.scene.spheres.push_back({vec3_from_json(s.at("center")), s.at("radius").get<double>()});
    for (const auto& t : j.at("targets"))
        p.targets.push_back({vec3_from_json(t.at("position")), t.at("onset_ms").get<double>(),
                             t.at("dwell_ms").get<double>()});
    return p;
}

} // namespace gaze
