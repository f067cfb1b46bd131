#pragma once

#include <cstdint>
#include <vector>

#include "gaze_events/classify.hpp"
#include "gaze_events/ingest.hpp"
#include "gaze_events/metrics.hpp"
#include "gaze_events/protocol.hpp"
#include "gaze_events/rng.hpp"

namespace gaze {

struct SimulationConfig {
    double sample_rate_hz{120.0};
    double rate_jitter{0.1}; // fraction; sampling intervals are unstable
    // Marginal sd of the angular tracker error during fixation. The error is
    // an AR(1) drift, not white noise: per-sample white error at tracker
    // precision would put a ~85 deg/s noise floor on the velocity signal at
    // 120 Hz and no velocity threshold in the tuned range would survive it.
    double angular_noise_sigma_deg{0.5};
    double noise_correlation{0.95};
    double saccadic_latency_ms{200.0};
    double blink_rate_per_min{10.0}; // 10/min x 150 ms ~ 2.5% missing samples
    double blink_duration_ms{150.0};
    double far_miss_rate{0.0}; // fraction of fixation samples forced onto the far wall
    std::uint64_t seed{0};
};

enum class TruthLabel : std::uint8_t { Fixation, Saccade, Blink };

struct TruthFixation {
    Vec3 position; // the target, not the measured centroid
    double t_start_ms{0.0};
    double duration_ms{0.0};
    std::size_t target_index{0};
};

struct GroundTruth {
    std::vector<TruthLabel> labels;
    std::vector<std::size_t> target_index;
    std::vector<TruthFixation> fixations;
};

struct SimulatedSession {
    std::vector<GazeSample> samples; // raw-tracker convention, ready for ingest
    GroundTruth truth;
};

namespace detail {

inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

/// Spherical interpolation between unit directions; monotone in angle.
inline Vec3 slerp_dir(const Vec3& a, const Vec3& b, double u) {
    const double omega = angle_between_rad(a, b);
    if (omega < 1e-9) return a;
    const double s = std::sin(omega);
    return normalized(a * (std::sin((1.0 - u) * omega) / s) + b * (std::sin(u * omega) / s));
}

/// Orthonormal tangent basis for a unit direction.
inline void tangent_basis(const Vec3& d, Vec3& u, Vec3& v) {
    const Vec3 up = std::abs(d.y) < 0.99 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
    u = normalized(cross(up, d));
    v = cross(d, u);
}

inline Vec3 offset_direction(const Vec3& d, double ox_rad, double oy_rad) {
    Vec3 u, v;
    tangent_basis(d, u, v);
    return normalized(d + u * ox_rad + v * oy_rad);
}

} // namespace detail

/// Generate one synthetic labeled session. The gaze holds each target for
/// the saccadic latency after the next onset, then travels along a
/// smoothstep angular trajectory for 2.2*A + 21 ms, then fixates the new
/// target under correlated angular jitter. Blinks blank the gaze cells so
/// the ingest fill rule is exercised end to end. Deterministic under seed.
inline SimulatedSession simulate_session(const StimulusProtocol& protocol,
                                         const SimulationConfig& cfg) {
    const std::size_t n = protocol.targets.size();
    if (n == 0) throw ContractError("simulate_session: empty protocol");
    const Vec3 eye = protocol.viewer_origin;

    const auto saccades = stimulus_saccades(protocol);
    std::vector<double> depart(n, 0.0), arrive(n, 0.0);
    arrive[0] = protocol.targets[0].onset_ms;
    for (std::size_t k = 1; k < n; ++k) {
        const double dur = saccade_duration_model_ms(saccades[k - 1].amplitude_deg);
        depart[k] = protocol.targets[k].onset_ms + cfg.saccadic_latency_ms;
        arrive[k] = depart[k] + dur;
        if (cfg.saccadic_latency_ms + dur >= protocol.targets[k].dwell_ms)
            throw InfeasibleProtocolError(
                "simulate_session: dwell shorter than latency plus saccade duration at target " +
                std::to_string(k));
    }

    std::vector<Vec3> dirs(n);
    for (std::size_t k = 0; k < n; ++k)
        dirs[k] = normalized(protocol.targets[k].position - eye);

    // angular radius of the sphere sitting at a target, for far-miss aiming
    auto sphere_angular_radius_deg = [&](std::size_t k) {
        for (const Sphere& s : protocol.scene.spheres)
            if (s.center == protocol.targets[k].position && s.radius > 0.0) {
                const double range = distance(eye, s.center);
                return std::asin(std::min(1.0, s.radius / range)) * kRadToDeg;
            }
        return 0.0;
    };

    Rng rng(cfg.seed);
    const double period = 1000.0 / cfg.sample_rate_hz;
    const double sigma_rad = cfg.angular_noise_sigma_deg * kDegToRad;
    const double rho = cfg.noise_correlation;
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    double drift_x = 0.0, drift_y = 0.0;
    double blink_until = -1.0;
    const double session_end = protocol.end_ms();

    SimulatedSession out;
    std::size_t seg = 0; // current target index
    double t = protocol.targets[0].onset_ms;
    double prev_t = t;
    while (t < session_end - 1e-9) {
        while (seg + 1 < n && t >= arrive[seg + 1]) ++seg;
        const bool in_saccade = seg + 1 < n && t >= depart[seg + 1];
        const std::size_t target = in_saccade ? seg + 1 : seg;

        // blink scheduling
        if (t >= blink_until && cfg.blink_rate_per_min > 0.0) {
            const double p = cfg.blink_rate_per_min / 60000.0 * (t - prev_t);
            if (rng.bernoulli(p)) blink_until = t + cfg.blink_duration_ms;
        }
        const bool blinking = t < blink_until;

        Vec3 dir;
        if (in_saccade) {
            const double u = (t - depart[seg + 1]) / (arrive[seg + 1] - depart[seg + 1]);
            dir = detail::slerp_dir(dirs[seg], dirs[seg + 1], detail::smoothstep(u));
        } else {
            dir = dirs[seg];
            if (sigma_rad > 0.0) {
                drift_x = rho * drift_x + innovation * rng.gaussian(0.0, sigma_rad);
                drift_y = rho * drift_y + innovation * rng.gaussian(0.0, sigma_rad);
                dir = detail::offset_direction(dir, drift_x, drift_y);
            }
            if (cfg.far_miss_rate > 0.0 && rng.bernoulli(cfg.far_miss_rate)) {
                const double clearance = sphere_angular_radius_deg(seg);
                for (int attempt = 0; attempt < 64; ++attempt) {
                    const double beta = (clearance + 0.05 + rng.uniform(0.0, 0.5)) * kDegToRad;
                    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
                    const Vec3 cand = detail::offset_direction(
                        dirs[seg], beta * std::cos(phi), beta * std::sin(phi));
                    const Vec3 hit = ray_scene_intersection(Ray{eye, cand}, protocol.scene);
                    if (hit.z >= protocol.scene.room_max.z - 1e-9) {
                        dir = cand;
                        break;
                    }
                }
            }
        }

        GazeSample s;
        s.timestamp_ms = t;
        s.headset_position = eye; // head fixed; camera pose is the viewer origin
        if (blinking) {
            s.openness_left = 0.0;
            s.openness_right = 0.0;
        } else {
            // emit in the right-handed tracker convention: X negated, origin
            // eye-local (the ingest pipeline undoes both)
            s.gaze_origin = Vec3{-0.0, 0.0, 0.0};
            s.gaze_direction = Vec3{-dir.x, dir.y, dir.z};
            s.pupil_left_mm = 3.5;
            s.pupil_right_mm = 3.5;
            s.openness_left = 1.0;
            s.openness_right = 1.0;
        }
        out.samples.push_back(s);
        out.truth.labels.push_back(blinking ? TruthLabel::Blink
                                   : in_saccade ? TruthLabel::Saccade
                                                : TruthLabel::Fixation);
        out.truth.target_index.push_back(target);

        prev_t = t;
        t += period * (1.0 + cfg.rate_jitter * rng.uniform(-1.0, 1.0));
    }

    // true fixation tuples from the phase boundaries and the emitted samples
    for (std::size_t k = 0; k < n; ++k) {
        const double a = arrive[k];
        const double b = k + 1 < n ? depart[k + 1] : session_end;
        double first = -1.0, last = -1.0;
        for (const GazeSample& s : out.samples) {
            if (s.timestamp_ms >= a && s.timestamp_ms < b) {
                if (first < 0.0) first = s.timestamp_ms;
                last = s.timestamp_ms;
            }
        }
        if (first >= 0.0)
            out.truth.fixations.push_back({protocol.targets[k].position, first, last - first, k});
    }
    return out;
}

struct Agreement {
    double sample_accuracy{0.0};
    double fixation_recall{0.0};
};

/// Per-sample agreement between ground truth and a classification. Blink
/// samples are excluded from the accuracy; a true fixation counts as
/// recalled when one detected fixation overlaps at least half of it.
inline Agreement label_agreement(const GroundTruth& truth, const LabeledStream& stream) {
    if (truth.labels.size() != stream.labels.size())
        throw ContractError("label_agreement: stream/truth length mismatch");
    std::size_t considered = 0, matched = 0;
    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
        if (truth.labels[i] == TruthLabel::Blink) continue;
        ++considered;
        const bool truth_fix = truth.labels[i] == TruthLabel::Fixation;
        const bool got_fix = stream.labels[i] == Label::Fixation;
        if (truth_fix == got_fix) ++matched;
    }
    Agreement a;
    a.sample_accuracy = considered ? static_cast<double>(matched) / considered : 0.0;
    if (!truth.fixations.empty()) {
        std::size_t recalled = 0;
        for (const TruthFixation& tf : truth.fixations) {
            const double t0 = tf.t_start_ms, t1 = tf.t_start_ms + tf.duration_ms;
            for (const Fixation& f : stream.fixations) {
                const double ov = std::min(t1, f.t_start_ms + f.duration_ms) -
                                  std::max(t0, f.t_start_ms);
                if (tf.duration_ms > 0.0 && ov >= 0.5 * tf.duration_ms) {
                    ++recalled;
                    break;
                }
            }
        }
        a.fixation_recall = static_cast<double>(recalled) / truth.fixations.size();
    }
    return a;
}

} // namespace gaze
