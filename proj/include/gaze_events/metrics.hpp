#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "gaze_events/classify.hpp"
#include "gaze_events/protocol.hpp"

namespace gaze {

inline constexpr std::size_t kMetricCount = 7;
inline constexpr std::array<const char*, kMetricCount> kMetricNames = {
    "fqns", "fqls", "fn", "afd", "sn", "asa", "sqns"};

inline constexpr double kSaccadicLatencyMs = 200.0;

/// Expected saccade duration in ms for an amplitude in degrees.
inline double saccade_duration_model_ms(double amplitude_deg) {
    return 2.2 * amplitude_deg + 21.0;
}

struct IdealValues {
    double afn{21.0};
    double afd_ms{1500.0};
    double ans{20.0};
    double asa_deg{0.0};   // per-protocol
    double fqns_pct{0.0};  // per-protocol
    double fqls_m{0.5};
    double sqns_pct{100.0};
};

/// Ideal FQnS: the fraction of stimulus fixation time that remains after
/// subtracting one saccadic latency plus one model saccade duration per
/// stimulus saccade.
inline double ideal_fqns(const StimulusProtocol& protocol) {
    const auto saccades = stimulus_saccades(protocol);
    if (saccades.empty()) throw ContractError("ideal_fqns: need at least 2 targets");
    double lost = 0.0;
    for (const auto& s : saccades)
        lost += kSaccadicLatencyMs + saccade_duration_model_ms(s.amplitude_deg);
    return 100.0 * (1.0 - lost / protocol.total_dwell_ms());
}

inline IdealValues ideal_values(const StimulusProtocol& protocol) {
    if (protocol.targets.size() < 2)
        throw ContractError("ideal_values: need at least 2 targets");
    IdealValues v;
    v.afn = static_cast<double>(protocol.targets.size());
    v.afd_ms = protocol.total_dwell_ms() / static_cast<double>(protocol.targets.size());
    const auto saccades = stimulus_saccades(protocol);
    v.ans = static_cast<double>(saccades.size());
    double amp = 0.0;
    for (const auto& s : saccades) amp += s.amplitude_deg;
    v.asa_deg = amp / static_cast<double>(saccades.size());
    v.fqns_pct = ideal_fqns(protocol);
    return v;
}

struct SaccadeRun {
    std::size_t first{0};
    std::size_t last{0};
};

inline std::vector<SaccadeRun> saccade_runs(const std::vector<Label>& labels) {
    std::vector<SaccadeRun> runs;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] == Label::Saccade) {
            SaccadeRun r{i, i};
            while (r.last + 1 < labels.size() && labels[r.last + 1] == Label::Saccade) ++r.last;
            runs.push_back(r);
            i = r.last + 1;
        } else {
            ++i;
        }
    }
    return runs;
}

/// Amplitude of one detected saccade: the visual angle, seen from the run's
/// first-sample origin, between the positions flanking the run. Flanks clamp
/// to the run itself at stream boundaries.
inline double detected_saccade_amplitude(const SaccadeRun& run,
                                         const std::vector<GazePoint>& points) {
    const Vec3& origin = points[run.first].origin;
    const Vec3& before = points[run.first > 0 ? run.first - 1 : run.first].position;
    const Vec3& after =
        points[run.last + 1 < points.size() ? run.last + 1 : run.last].position;
    if (before == after) return 0.0;
    return angle_at_origin(origin, before, after);
}

struct BasicMetrics {
    double fn_count{0.0};
    double afd_ms{0.0};
    double sn_count{0.0};
    double asa_deg{0.0};
    bool afd_degenerate{false}; // zero fixations
    bool asa_degenerate{false}; // zero saccade runs
};

inline BasicMetrics basic_metrics(const LabeledStream& stream,
                                  const std::vector<GazePoint>& points) {
    BasicMetrics m;
    m.fn_count = static_cast<double>(stream.fixations.size());
    if (stream.fixations.empty()) {
        m.afd_degenerate = true;
    } else {
        double sum = 0.0;
        for (const Fixation& f : stream.fixations) sum += f.duration_ms;
        m.afd_ms = sum / static_cast<double>(stream.fixations.size());
    }
    const auto runs = saccade_runs(stream.labels);
    m.sn_count = static_cast<double>(runs.size());
    if (runs.empty()) {
        m.asa_degenerate = true;
    } else {
        double sum = 0.0;
        for (const SaccadeRun& r : runs) sum += detected_saccade_amplitude(r, points);
        m.asa_deg = sum / static_cast<double>(runs.size());
    }
    return m;
}

struct MetricOptions {
    // Credit only the overlap of a fixation with the dwell window of the
    // target it sits on. Full-duration crediting (the literal reading of the
    // published prose) over-counts the saccadic-latency overhang into the
    // next window and never approaches the ideal value.
    bool fqns_clip_to_window = true;
    double alignment_tolerance_ms = 100.0;
};

namespace detail {

inline void check_alignment(const std::vector<GazePoint>& points,
                            const StimulusProtocol& protocol, double tol_ms) {
    if (points.empty()) throw EmptySessionError("metrics: empty point stream");
    if (protocol.targets.empty()) throw ContractError("metrics: empty protocol");
    const double t0 = protocol.targets.front().onset_ms;
    if (points.front().timestamp_ms < t0 - tol_ms ||
        points.back().timestamp_ms > protocol.end_ms() + tol_ms)
        throw AlignmentError("session time span does not match the protocol");
}

/// Index of the target whose dwell window contains t, clamped to the first
/// and last windows.
inline std::size_t target_at(const StimulusProtocol& protocol, double t) {
    const auto& ts = protocol.targets;
    if (t < ts.front().onset_ms) return 0;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (t < ts[i].onset_ms + ts[i].dwell_ms) return i;
    return ts.size() - 1;
}

inline double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

} // namespace detail

/// Spatial proximity radius per target: the chord, at the target's range
/// from the viewer, of one third of the previous stimulus saccade's
/// amplitude. The first target mirrors the first saccade's amplitude.
/// Exposed so FQnS decisions can be audited per fixation.
inline std::vector<double> proximity_radii(const StimulusProtocol& protocol) {
    const auto saccades = stimulus_saccades(protocol);
    if (saccades.empty()) throw ContractError("proximity_radii: need at least 2 targets");
    std::vector<double> radii(protocol.targets.size(), 0.0);
    for (std::size_t k = 0; k < protocol.targets.size(); ++k) {
        const double amp =
            k == 0 ? saccades.front().amplitude_deg : saccades[k - 1].amplitude_deg;
        const double range = distance(protocol.targets[k].position, protocol.viewer_origin);
        radii[k] = 2.0 * range * std::sin(amp / 3.0 * kDegToRad / 2.0);
    }
    return radii;
}

/// FQnS: percentage of stimulus-encoded fixation time recovered by
/// classified fixations within the proximity radius of the right target.
inline double fqns(const LabeledStream& stream, const std::vector<GazePoint>& points,
                   const StimulusProtocol& protocol, const MetricOptions& opt = {}) {
    detail::check_alignment(points, protocol, opt.alignment_tolerance_ms);
    if (protocol.targets.size() < 2) throw ContractError("fqns: need at least 2 targets");
    const auto radii = proximity_radii(protocol);
    double credited = 0.0;
    for (const Fixation& f : stream.fixations) {
        const double f0 = f.t_start_ms;
        const double f1 = f.t_start_ms + f.duration_ms;
        if (opt.fqns_clip_to_window) {
            for (std::size_t k = 0; k < protocol.targets.size(); ++k) {
                const auto& t = protocol.targets[k];
                const double ov = detail::overlap(f0, f1, t.onset_ms, t.onset_ms + t.dwell_ms);
                if (ov > 0.0 && distance(f.center, t.position) <= radii[k]) credited += ov;
            }
        } else {
            const std::size_t k = detail::target_at(protocol, f0);
            if (distance(f.center, protocol.targets[k].position) <= radii[k])
                credited += f.duration_ms;
        }
    }
    return 100.0 * credited / protocol.total_dwell_ms();
}

struct FqlsResult {
    double value_m{0.0};
    bool degenerate{false}; // no samples classified as fixation
};

/// FQlS: mean over fixation-classified samples of the Euclidean distance
/// between the sample's fixation-group centroid and the position of the
/// stimulus target the group started on.
inline FqlsResult fqls(const LabeledStream& stream, const std::vector<GazePoint>& points,
                       const StimulusProtocol& protocol, const MetricOptions& opt = {}) {
    detail::check_alignment(points, protocol, opt.alignment_tolerance_ms);
    double sum = 0.0;
    std::size_t n = 0;
    for (const Fixation& f : stream.fixations) {
        const std::size_t k = detail::target_at(protocol, f.t_start_ms);
        const double d = distance(f.center, protocol.targets[k].position);
        const std::size_t weight = f.last_index - f.first_index + 1;
        sum += d * static_cast<double>(weight);
        n += weight;
    }
    if (n == 0) return {0.0, true};
    return {sum / static_cast<double>(n), false};
}

/// SQnS: total detected saccade amplitude over total stimulus saccade
/// amplitude, in percent.
inline double sqns(const LabeledStream& stream, const std::vector<GazePoint>& points,
                   const StimulusProtocol& protocol) {
    const auto saccades = stimulus_saccades(protocol);
    double stimulus_total = 0.0;
    for (const auto& s : saccades) stimulus_total += s.amplitude_deg;
    if (!(stimulus_total > 0.0))
        throw UndefinedMetricError("sqns: zero total stimulus saccade amplitude");
    double detected_total = 0.0;
    for (const SaccadeRun& r : saccade_runs(stream.labels))
        detected_total += detected_saccade_amplitude(r, points);
    return 100.0 * detected_total / stimulus_total;
}

/// Min-max normalization of one metric's values over a comparison set.
/// A constant metric (max == min) maps everything to 0.
inline std::vector<double> normalize_deviations(const std::vector<double>& values,
                                                double y_min, double y_max) {
    std::vector<double> out;
    out.reserve(values.size());
    const double span = y_max - y_min;
    for (double v : values) out.push_back(span > 0.0 ? (v - y_min) / span : 0.0);
    return out;
}

/// Overall score: the arithmetic mean of the seven normalized deviations.
inline double overall_score(const std::vector<double>& normalized) {
    if (normalized.size() != kMetricCount)
        throw ContractError("overall_score: expected exactly 7 values");
    double sum = 0.0;
    for (double v : normalized) sum += v;
    return sum / static_cast<double>(kMetricCount);
}

struct MetricReport {
    // raw values in canonical order fqns, fqls, fn, afd, sn, asa, sqns
    std::array<double, kMetricCount> raw{};
    IdealValues ideals;
    std::array<double, kMetricCount> deviations{};
    std::array<double, kMetricCount> normalized{};
    double overall{std::numeric_limits<double>::quiet_NaN()};
    bool fqls_degenerate{false};
    bool afd_degenerate{false};
    bool asa_degenerate{false};
};

/// Raw metrics and deviations from the ideals for one classification of one
/// session. Normalization and the Overall score are a separate reduction
/// over a full comparison set (see NormalizationBounds).
inline MetricReport compute_metrics(const LabeledStream& stream,
                                    const std::vector<GazePoint>& points,
                                    const StimulusProtocol& protocol,
                                    const MetricOptions& opt = {}) {
    MetricReport r;
    r.ideals = ideal_values(protocol);
    const BasicMetrics basic = basic_metrics(stream, points);
    const FqlsResult fq = fqls(stream, points, protocol, opt);
    r.raw = {fqns(stream, points, protocol, opt),
             fq.value_m,
             basic.fn_count,
             basic.afd_ms,
             basic.sn_count,
             basic.asa_deg,
             sqns(stream, points, protocol)};
    r.fqls_degenerate = fq.degenerate;
    r.afd_degenerate = basic.afd_degenerate;
    r.asa_degenerate = basic.asa_degenerate;
    const std::array<double, kMetricCount> ideal = {
        r.ideals.fqns_pct, r.ideals.fqls_m, r.ideals.afn,     r.ideals.afd_ms,
        r.ideals.ans,      r.ideals.asa_deg, r.ideals.sqns_pct};
    for (std::size_t i = 0; i < kMetricCount; ++i)
        r.deviations[i] = std::abs(r.raw[i] - ideal[i]);
    return r;
}

struct NormalizationBounds {
    std::array<double, kMetricCount> min{};
    std::array<double, kMetricCount> max{};
    std::array<bool, kMetricCount> constant{};
};

template <typename Reports>
inline NormalizationBounds normalization_bounds(const Reports& reports) {
    NormalizationBounds b;
    b.min.fill(std::numeric_limits<double>::infinity());
    b.max.fill(-std::numeric_limits<double>::infinity());
    for (const MetricReport& r : reports)
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            b.min[i] = std::min(b.min[i], r.deviations[i]);
            b.max[i] = std::max(b.max[i], r.deviations[i]);
        }
    for (std::size_t i = 0; i < kMetricCount; ++i) b.constant[i] = !(b.max[i] > b.min[i]);
    return b;
}

inline void apply_normalization(MetricReport& r, const NormalizationBounds& b) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        const double span = b.max[i] - b.min[i];
        r.normalized[i] = b.constant[i] ? 0.0 : (r.deviations[i] - b.min[i]) / span;
    }
    double sum = 0.0;
    for (double v : r.normalized) sum += v;
    r.overall = sum / static_cast<double>(kMetricCount);
}

} // namespace gaze
