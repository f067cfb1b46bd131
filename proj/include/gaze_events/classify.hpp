#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaze_events/geometry.hpp"
#include "gaze_events/session.hpp"

namespace gaze {

enum class Algorithm { IVT, IDT, IVDT, MIVDT };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::IVT: return "ivt";
        case Algorithm::IDT: return "idt";
        case Algorithm::IVDT: return "ivdt";
        case Algorithm::MIVDT: return "mivdt";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "ivt") return Algorithm::IVT;
    if (s == "idt") return Algorithm::IDT;
    if (s == "ivdt") return Algorithm::IVDT;
    if (s == "mivdt") return Algorithm::MIVDT;
    throw ContractError("unknown algorithm '" + s + "'");
}

struct ClassifierParams {
    double velocity_threshold{0.0};    // deg/s   (IVT, IVDT, m-IVDT)
    double dispersion_threshold{0.0};  // degrees (IDT, IVDT, m-IVDT)
    double min_fixation_duration{0.0}; // ms      (IDT, IVDT, m-IVDT)
    double z_outlier_threshold{4.9};   // meters  (m-IVDT only)
};

inline bool uses_velocity(Algorithm a) { return a != Algorithm::IDT; }
inline bool uses_dispersion(Algorithm a) { return a != Algorithm::IVT; }
inline bool uses_duration(Algorithm a) { return a != Algorithm::IVT; }

/// Optimal thresholds reported for each algorithm on the original corpus.
inline ClassifierParams paper_optimal_params(Algorithm a) {
    switch (a) {
        case Algorithm::IVT: return {150.0, 0.0, 0.0, 4.9};
        case Algorithm::IDT: return {0.0, 5.75, 150.0, 4.9};
        case Algorithm::IVDT: return {140.0, 5.75, 110.0, 4.9};
        case Algorithm::MIVDT: return {140.0, 5.75, 130.0, 4.9};
    }
    return {};
}

enum class Label : std::uint8_t { Saccade = 0, Fixation = 1 };

struct Fixation {
    Vec3 center;
    double t_start_ms{0.0};
    double duration_ms{0.0};
    std::size_t first_index{0};
    std::size_t last_index{0};
    bool corrected{false};    // m-IVDT: at least one member was projected
    bool all_outliers{false}; // m-IVDT: no reference available, centroid left raw
};

struct LabeledStream {
    std::vector<Label> labels; // one per input point
    std::vector<Fixation> fixations;
};

// The adjacent-group merge test exists in two readings: the pseudocode
// compares the first point of the current group against the last point of
// the previous group, the prose compares group centroids. Boundary points
// sit one sample apart across a smooth saccade, which merges groups that are
// far apart; centroid mode is therefore the default.
enum class MergeMode { Centroid, Boundary };

struct ClassifyOptions {
    MergeMode merge_mode = MergeMode::Centroid;
};

namespace detail {

inline Vec3 group_centroid(const std::vector<GazePoint>& pts,
                           const std::vector<std::size_t>& members) {
    Vec3 sum;
    for (std::size_t j : members) sum += pts[j].position;
    return sum / static_cast<double>(members.size());
}

inline double group_duration(const std::vector<GazePoint>& pts,
                             const std::vector<std::size_t>& members) {
    return pts[members.back()].timestamp_ms - pts[members.front()].timestamp_ms;
}

inline void apply_span_labels(LabeledStream& out) {
    for (const Fixation& f : out.fixations)
        for (std::size_t i = f.first_index; i <= f.last_index; ++i)
            out.labels[i] = Label::Fixation;
}

inline double require_velocity(const GazePoint& p) {
    if (!p.velocity_deg_s) throw ContractError("classifier requires precomputed velocities");
    return *p.velocity_deg_s;
}

} // namespace detail

/// Velocity-Threshold Identification. Maximal runs of samples slower than
/// the threshold become fixation groups; each group emits centroid
/// coordinates, the first member's timestamp and the covered duration.
/// There is no duration filter, so single-sample fixations (d = 0) occur.
inline LabeledStream classify_ivt(const std::vector<GazePoint>& points,
                                  const ClassifierParams& params) {
    if (points.empty()) throw EmptySessionError("classify_ivt: empty point list");
    LabeledStream out;
    out.labels.assign(points.size(), Label::Saccade);
    std::vector<std::size_t> group;
    auto flush = [&]() {
        if (group.empty()) return;
        Fixation f;
        f.center = detail::group_centroid(points, group);
        f.t_start_ms = points[group.front()].timestamp_ms;
        f.duration_ms = detail::group_duration(points, group);
        f.first_index = group.front();
        f.last_index = group.back();
        out.fixations.push_back(f);
        group.clear();
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (detail::require_velocity(points[i]) < params.velocity_threshold)
            group.push_back(i);
        else
            flush();
    }
    flush();
    detail::apply_span_labels(out);
    return out;
}

namespace detail {

// Shared grouping engine for the dispersion/duration family. Membership of
// the current fixation group (CFG) is decided by `joins(i)`; when a sample
// breaks the group, the group survives only if it exceeds the minimum
// duration, and a surviving group either merges into the previous group
// (PFG) or replaces it, emitting the old PFG as a fixation.
//
// Deliberate deviations from the published pseudocode, shared with the
// straight-line reference used in tests:
//  - the breaking sample does not seed the next group; it stays a saccade
//    sample and the next joining sample starts the new group,
//  - the final PFG/CFG are flushed at end of stream under the same rules,
//  - a group is emitted only if its duration exceeds the minimum, which
//    affects only the initial single-sample PFG.
template <typename JoinsFn, typename EmitFn>
void group_by_threshold(const std::vector<GazePoint>& points, const ClassifierParams& params,
                        const ClassifyOptions& opt, JoinsFn joins, EmitFn emit) {
    const std::size_t n = points.size();
    std::vector<std::size_t> pfg{0}; // previous fixation group, seeded with p0
    std::vector<std::size_t> cfg;    // current fixation group, seeded with p1
    if (n >= 2) cfg.push_back(1);

    auto emit_gated = [&](const std::vector<std::size_t>& g) {
        if (g.empty()) return;
        if (group_duration(points, g) > params.min_fixation_duration) emit(g);
    };

    // Merge test between CFG and PFG, measured from the current origin.
    auto mergeable = [&](const Vec3& origin) {
        if (pfg.empty() || cfg.empty()) return false;
        const double dd =
            opt.merge_mode == MergeMode::Boundary
                ? angle_at_origin(origin, points[cfg.front()].position,
                                  points[pfg.back()].position)
                : angle_at_origin(origin, group_centroid(points, cfg),
                                  group_centroid(points, pfg));
        return dd < params.dispersion_threshold;
    };

    auto flush_cfg = [&](const Vec3& origin) {
        if (cfg.empty()) return;
        if (group_duration(points, cfg) > params.min_fixation_duration) {
            if (mergeable(origin)) {
                pfg.insert(pfg.end(), cfg.begin(), cfg.end());
            } else {
                emit_gated(pfg);
                pfg = cfg;
            }
        }
        cfg.clear();
    };

    for (std::size_t i = 2; i < n; ++i) {
        if (joins(i, cfg)) {
            cfg.push_back(i);
        } else if (!cfg.empty()) {
            flush_cfg(points[i].origin);
        }
    }
    if (!points.empty()) flush_cfg(points[n - 1].origin);
    emit_gated(pfg);
}

} // namespace detail

/// Dispersion-Threshold Identification, windowless variant: the group grows
/// while the visual angle from the current origin between the group centroid
/// and the new point stays below the dispersion threshold.
inline LabeledStream classify_idt(const std::vector<GazePoint>& points,
                                  const ClassifierParams& params,
                                  const ClassifyOptions& opt = {}) {
    if (points.empty()) throw EmptySessionError("classify_idt: empty point list");
    LabeledStream out;
    out.labels.assign(points.size(), Label::Saccade);
    auto emit = [&](const std::vector<std::size_t>& g) {
        Fixation f;
        f.center = detail::group_centroid(points, g);
        f.t_start_ms = points[g.front()].timestamp_ms;
        f.duration_ms = detail::group_duration(points, g);
        f.first_index = g.front();
        f.last_index = g.back();
        out.fixations.push_back(f);
    };
    // An empty group accepts any point; otherwise the new point must stay
    // within the dispersion threshold of the group centroid as seen from the
    // current sample's gaze origin.
    auto joins = [&](std::size_t i, const std::vector<std::size_t>& cfg) {
        if (cfg.empty()) return true;
        return angle_at_origin(points[i].origin, detail::group_centroid(points, cfg),
                               points[i].position) < params.dispersion_threshold;
    };
    detail::group_by_threshold(points, params, opt, joins, emit);
    detail::apply_span_labels(out);
    return out;
}

/// Velocity & Dispersion-Threshold Identification: membership by velocity,
/// survival by duration, adjacent-group merging by dispersion.
inline LabeledStream classify_ivdt(const std::vector<GazePoint>& points,
                                   const ClassifierParams& params,
                                   const ClassifyOptions& opt = {}) {
    if (points.empty()) throw EmptySessionError("classify_ivdt: empty point list");
    LabeledStream out;
    out.labels.assign(points.size(), Label::Saccade);
    auto emit = [&](const std::vector<std::size_t>& g) {
        Fixation f;
        f.center = detail::group_centroid(points, g);
        f.t_start_ms = points[g.front()].timestamp_ms;
        f.duration_ms = detail::group_duration(points, g);
        f.first_index = g.front();
        f.last_index = g.back();
        out.fixations.push_back(f);
    };
    auto joins = [&](std::size_t i, const std::vector<std::size_t>&) {
        return detail::require_velocity(points[i]) < params.velocity_threshold;
    };
    detail::group_by_threshold(points, params, opt, joins, emit);
    detail::apply_span_labels(out);
    return out;
}

struct CorrectionStats {
    std::size_t corrected{0};
    std::size_t skipped{0}; // reference coincided with the pupil, or no plane hit
};

/// Depth-outlier correction: points at or beyond the z threshold are
/// replaced by the intersection of the pupil-to-point ray with the plane
/// through the reference fixation whose normal points from the pupil to the
/// reference. Points below the threshold pass through unchanged.
inline std::vector<Vec3> correct_samples(const std::vector<Vec3>& group_points,
                                         const std::vector<Vec3>& origins,
                                         const Vec3& reference_fixation, double z_threshold,
                                         CorrectionStats* stats = nullptr) {
    if (group_points.size() != origins.size())
        throw ContractError("correct_samples(): points/origins size mismatch");
    std::vector<Vec3> out = group_points;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].z < z_threshold) continue;
        const Vec3& pupil = origins[i];
        const Vec3 to_ref = reference_fixation - pupil;
        if (!(norm2(to_ref) > 0.0) || !(norm2(out[i] - pupil) > 0.0)) {
            if (stats) ++stats->skipped;
            continue;
        }
        const Plane plane{reference_fixation, normalized(to_ref)};
        const Ray sight{pupil, normalized(out[i] - pupil)};
        if (auto hit = ray_plane_intersection(sight, plane)) {
            out[i] = *hit;
            if (stats) ++stats->corrected;
        } else if (stats) {
            ++stats->skipped;
        }
    }
    return out;
}

/// m-IVDT: grouping, survival and merging identical to IVDT; before emitting
/// a fixation, members at or beyond the z threshold are projected onto the
/// plane through the centroid of the group's in-range members, and the
/// centroid is recomputed over the corrected members.
inline LabeledStream classify_mivdt(const std::vector<GazePoint>& points,
                                    const ClassifierParams& params,
                                    const ClassifyOptions& opt = {}) {
    if (points.empty()) throw EmptySessionError("classify_mivdt: empty point list");
    LabeledStream out;
    out.labels.assign(points.size(), Label::Saccade);
    auto emit = [&](const std::vector<std::size_t>& g) {
        Fixation f;
        f.t_start_ms = points[g.front()].timestamp_ms;
        f.duration_ms = detail::group_duration(points, g);
        f.first_index = g.front();
        f.last_index = g.back();

        std::vector<std::size_t> inliers;
        for (std::size_t j : g)
            if (points[j].position.z < params.z_outlier_threshold) inliers.push_back(j);

        if (inliers.size() == g.size()) {
            f.center = detail::group_centroid(points, g);
        } else if (inliers.empty()) {
            f.center = detail::group_centroid(points, g);
            f.all_outliers = true;
        } else {
            const Vec3 reference = detail::group_centroid(points, inliers);
            std::vector<Vec3> positions, origins;
            positions.reserve(g.size());
            origins.reserve(g.size());
            for (std::size_t j : g) {
                positions.push_back(points[j].position);
                origins.push_back(points[j].origin);
            }
            CorrectionStats stats;
            const std::vector<Vec3> corrected = correct_samples(
                positions, origins, reference, params.z_outlier_threshold, &stats);
            Vec3 sum;
            for (const Vec3& p : corrected) sum += p;
            f.center = sum / static_cast<double>(corrected.size());
            f.corrected = stats.corrected > 0;
        }
        out.fixations.push_back(f);
    };
    auto joins = [&](std::size_t i, const std::vector<std::size_t>&) {
        return detail::require_velocity(points[i]) < params.velocity_threshold;
    };
    detail::group_by_threshold(points, params, opt, joins, emit);
    detail::apply_span_labels(out);
    return out;
}

inline LabeledStream classify(Algorithm algo, const std::vector<GazePoint>& points,
                              const ClassifierParams& params, const ClassifyOptions& opt = {}) {
    switch (algo) {
        case Algorithm::IVT: return classify_ivt(points, params);
        case Algorithm::IDT: return classify_idt(points, params, opt);
        case Algorithm::IVDT: return classify_ivdt(points, params, opt);
        case Algorithm::MIVDT: return classify_mivdt(points, params, opt);
    }
    throw ContractError("classify(): bad algorithm");
}

} // namespace gaze
