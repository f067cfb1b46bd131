#include <gtest/gtest.h>

#include <cmath>

#include "gaze_events/classify.hpp"
#include "gaze_events/ingest.hpp"
#include "gaze_events/rng.hpp"
#include "reference_classifiers.hpp"

using namespace gaze;

namespace {

constexpr double kStep = 8.0; // ms between samples in hand traces

Vec3 dir_at(double deg) { return {std::sin(deg * kDegToRad), 0.0, std::cos(deg * kDegToRad)}; }

// point at a visual angle `deg` from straight ahead, `range` meters out
GazePoint point_at(double deg, double t, double range = 2.2, double velocity = 0.0) {
    GazePoint p;
    p.origin = {0, 1.2, 0};
    p.direction = dir_at(deg);
    p.position = p.origin + p.direction * range;
    p.timestamp_ms = t;
    p.velocity_deg_s = velocity;
    return p;
}

std::vector<GazePoint> dwell(double deg, double t0, double duration, double velocity = 0.0,
                             double range = 2.2) {
    std::vector<GazePoint> pts;
    for (double t = t0; t < t0 + duration; t += kStep)
        pts.push_back(point_at(deg, t, range, velocity));
    return pts;
}

void append(std::vector<GazePoint>& dst, const std::vector<GazePoint>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

bool streams_equal(const LabeledStream& a, const LabeledStream& b) {
    if (a.labels != b.labels) return false;
    if (a.fixations.size() != b.fixations.size()) return false;
    for (std::size_t i = 0; i < a.fixations.size(); ++i) {
        const Fixation &x = a.fixations[i], &y = b.fixations[i];
        if (!(x.center == y.center) || x.t_start_ms != y.t_start_ms ||
            x.duration_ms != y.duration_ms || x.first_index != y.first_index ||
            x.last_index != y.last_index)
            return false;
    }
    return true;
}

} // namespace

TEST(Ivt, AllBelowThresholdIsOneFixation) {
    auto pts = dwell(0.0, 0.0, 400.0, 10.0);
    const auto out = classify_ivt(pts, {150.0, 0, 0});
    ASSERT_EQ(out.fixations.size(), 1u);
    EXPECT_EQ(out.fixations[0].first_index, 0u);
    EXPECT_EQ(out.fixations[0].last_index, pts.size() - 1);
    for (Label l : out.labels) EXPECT_EQ(l, Label::Fixation);
}

TEST(Ivt, AllAboveThresholdIsNoFixation) {
    auto pts = dwell(0.0, 0.0, 400.0, 500.0);
    const auto out = classify_ivt(pts, {150.0, 0, 0});
    EXPECT_TRUE(out.fixations.empty());
    for (Label l : out.labels) EXPECT_EQ(l, Label::Saccade);
}

TEST(Ivt, EmptyInputThrows) {
    EXPECT_THROW(classify_ivt({}, {150.0, 0, 0}), EmptySessionError);
}

TEST(Ivt, TieAtThresholdIsSaccade) {
    auto pts = dwell(0.0, 0.0, 100.0, 150.0);
    const auto out = classify_ivt(pts, {150.0, 0, 0});
    EXPECT_TRUE(out.fixations.empty()); // strict comparison, per the pseudocode
}

TEST(Ivt, SingleSampleGroupHasZeroDuration) {
    std::vector<GazePoint> pts;
    pts.push_back(point_at(0, 0, 2.2, 500));
    pts.push_back(point_at(0, 8, 2.2, 10));
    pts.push_back(point_at(0, 16, 2.2, 500));
    const auto out = classify_ivt(pts, {150.0, 0, 0});
    ASSERT_EQ(out.fixations.size(), 1u);
    EXPECT_DOUBLE_EQ(out.fixations[0].duration_ms, 0.0);
}

TEST(Ivt, MonotoneInThreshold) {
    Rng rng(41);
    for (int seed = 0; seed < 20; ++seed) {
        std::vector<GazePoint> pts;
        for (int i = 0; i < 300; ++i)
            pts.push_back(point_at(rng.uniform(-20, 20), i * kStep, 2.2, rng.uniform(0, 400)));
        std::size_t prev = 0;
        for (double vel = 30.0; vel <= 150.0; vel += 10.0) {
            const auto out = classify_ivt(pts, {vel, 0, 0});
            std::size_t fix = 0;
            for (Label l : out.labels) fix += l == Label::Fixation;
            EXPECT_GE(fix, prev);
            prev = fix;
        }
    }
}

TEST(Idt, AllPointsIdenticalIsOneFixation) {
    auto pts = dwell(0.0, 0.0, 400.0);
    const auto out = classify_idt(pts, {0, 5.75, 50.0});
    ASSERT_EQ(out.fixations.size(), 1u);
    EXPECT_EQ(out.fixations[0].first_index, 0u);
    EXPECT_DOUBLE_EQ(out.fixations[0].t_start_ms, 0.0);
    EXPECT_NEAR(out.fixations[0].center.z, 2.2 + 1.2 * 0, 1e-12);
}

TEST(Idt, TwoClustersTenDegreesApartAreTwoFixations) {
    auto pts = dwell(0.0, 0.0, 400.0);
    append(pts, dwell(10.0, 400.0, 400.0));
    const auto out = classify_idt(pts, {0, 5.75, 50.0});
    ASSERT_EQ(out.fixations.size(), 2u);
    // the centroid separation is the stimulus separation
    EXPECT_NEAR(angle_at_origin({0, 1.2, 0}, out.fixations[0].center, out.fixations[1].center),
                10.0, 0.5);
}

TEST(Idt, ShortDwellFailsDurationFilter) {
    auto pts = dwell(0.0, 0.0, 40.0); // 5 samples, 32 ms span
    const auto out = classify_idt(pts, {0, 5.75, 50.0});
    EXPECT_TRUE(out.fixations.empty());
}

TEST(Idt, EmptyInputThrows) {
    EXPECT_THROW(classify_idt({}, {0, 5.75, 50.0}), EmptySessionError);
}

TEST(Idt, DurationFaithfulness) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<GazePoint> pts;
        double t = 0.0;
        for (int i = 0; i < 200; ++i) {
            pts.push_back(point_at(rng.uniform(-15, 15), t));
            t += rng.uniform(4.0, 14.0);
        }
        const double dur_min = rng.uniform(20.0, 120.0);
        const auto out = classify_idt(pts, {0, rng.uniform(1.0, 6.0), dur_min});
        for (const Fixation& f : out.fixations) EXPECT_GT(f.duration_ms, dur_min);
    }
}

TEST(Ivdt, StationaryGazeIsOneFixation) {
    auto pts = dwell(0.0, 0.0, 600.0, 5.0);
    const auto out = classify_ivdt(pts, {140.0, 5.75, 110.0});
    ASSERT_EQ(out.fixations.size(), 1u);
}

TEST(Ivdt, MicroDwellBetweenCloseDwellsMergesAway) {
    // 2 degree separation between the long dwells, 40 ms blip between them
    auto pts = dwell(0.0, 0.0, 400.0, 5.0);
    append(pts, dwell(1.0, 400.0, 16.0, 500.0)); // transit
    append(pts, dwell(1.0, 416.0, 40.0, 5.0));   // micro dwell
    append(pts, dwell(2.0, 456.0, 16.0, 500.0)); // transit
    append(pts, dwell(2.0, 472.0, 400.0, 5.0));
    const auto out = classify_ivdt(pts, {140.0, 5.75, 110.0});
    ASSERT_EQ(out.fixations.size(), 1u); // merged stream, no extra fixation
    EXPECT_EQ(out.fixations[0].first_index, 0u);
    EXPECT_EQ(out.fixations[0].last_index, pts.size() - 1);
}

TEST(Ivdt, DistantDwellsStaySeparate) {
    auto pts = dwell(0.0, 0.0, 400.0, 5.0);
    append(pts, dwell(5.0, 400.0, 24.0, 600.0)); // transit samples
    append(pts, dwell(10.0, 424.0, 400.0, 5.0));
    const auto out = classify_ivdt(pts, {140.0, 5.75, 110.0});
    ASSERT_EQ(out.fixations.size(), 2u);
    // transit samples stay saccades: exactly one saccade run between the two
    std::size_t runs = 0;
    bool in_run = false;
    for (Label l : out.labels) {
        if (l == Label::Saccade && !in_run) ++runs;
        in_run = l == Label::Saccade;
    }
    EXPECT_EQ(runs, 1u);
}

TEST(Ivdt, PerSampleExhaustiveness) {
    auto pts = dwell(0.0, 0.0, 200.0, 5.0);
    append(pts, dwell(10.0, 200.0, 200.0, 5.0));
    const auto out = classify_ivdt(pts, {140.0, 5.75, 110.0});
    EXPECT_EQ(out.labels.size(), pts.size());
}

TEST(CorrectSamples, NoOutliersIsIdentity) {
    std::vector<Vec3> points{{0, 1.2, 2.2}, {0.01, 1.2, 2.21}};
    std::vector<Vec3> origins{{0, 1.2, 0}, {0, 1.2, 0}};
    const auto out = correct_samples(points, origins, {0, 1.2, 2.2}, 4.9);
    ASSERT_EQ(out.size(), points.size());
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], points[i]);
}

TEST(CorrectSamples, ResultOnLineAndPlane) {
    const Vec3 pupil{0, 1.2, 0};
    const Vec3 reference{0.1, 1.3, 2.2};
    const Vec3 wall_point{0.4, 1.5, 4.9};
    const auto out = correct_samples({wall_point}, {pupil}, reference, 4.9);
    ASSERT_EQ(out.size(), 1u);
    const Vec3& x = out[0];
    const Vec3 n = normalized(reference - pupil);
    EXPECT_LT(std::abs(dot(n, x - reference)), 1e-6); // on the plane
    EXPECT_LT(norm(cross(x - pupil, wall_point - pupil)), 1e-6); // on the sight line
}

TEST(CorrectSamples, MatchesClosedFormOracle) {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        const Vec3 pupil{rng.uniform(-1, 1), rng.uniform(0.8, 1.6), rng.uniform(-1, 1)};
        const Vec3 reference{rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(1.5, 3)};
        const Vec3 sample{rng.uniform(-2, 2), rng.uniform(0, 3), rng.uniform(4.9, 5.2)};
        const auto out = correct_samples({sample}, {pupil}, reference, 4.9);
        // closed form: X = P + s (S - P), s = |R-P|^2 / ((R-P).(S-P))
        const Vec3 rp = reference - pupil;
        const Vec3 sp = sample - pupil;
        const double denom = dot(rp, sp);
        if (std::abs(denom) < 1e-12) continue;
        const double s = norm2(rp) / denom;
        if (s < 0) continue; // behind the pupil: correction skipped
        const Vec3 oracle = pupil + sp * s;
        EXPECT_LT(distance(out[0], oracle), 1e-9);
    }
}

TEST(CorrectSamples, FarWallMissPulledBackToDwellDepth) {
    // dwell points at z = 2.2, one wall miss at z = 4.9
    std::vector<Vec3> points, origins;
    const Vec3 pupil{0, 1.2, 0};
    for (int i = 0; i < 10; ++i) {
        points.push_back({0.001 * i, 1.2, 2.2});
        origins.push_back(pupil);
    }
    const Vec3 reference = centroid(points);
    points.push_back({0.05, 1.25, 4.9});
    origins.push_back(pupil);
    const auto out = correct_samples(points, origins, reference, 4.9);
    EXPECT_GE(out.back().z, 2.0);
    EXPECT_LE(out.back().z, 2.4);
}

TEST(CorrectSamples, ReferenceAtPupilSkips) {
    const Vec3 pupil{0, 1.2, 0};
    CorrectionStats stats;
    const auto out = correct_samples({{0, 1.2, 4.95}}, {pupil}, pupil, 4.9, &stats);
    EXPECT_EQ(stats.skipped, 1u);
    EXPECT_EQ(out[0], (Vec3{0, 1.2, 4.95}));
}

TEST(Mivdt, EquivalentToIvdtWithoutOutliers) {
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<GazePoint> pts;
        double t = 0.0;
        for (int i = 0; i < 150; ++i) {
            auto p = point_at(rng.uniform(-15, 15), t, rng.uniform(1.0, 3.0),
                              rng.uniform(0, 300));
            pts.push_back(p);
            t += rng.uniform(5.0, 12.0);
        }
        const ClassifierParams params{140.0, 5.75, 110.0, 4.9};
        const auto a = classify_ivdt(pts, params);
        const auto b = classify_mivdt(pts, params);
        EXPECT_TRUE(streams_equal(a, b)); // bit-for-bit when every z < threshold
        for (const Fixation& f : b.fixations) EXPECT_FALSE(f.corrected);
    }
}

TEST(Mivdt, FarMissesCorrectedInCentroid) {
    auto pts = dwell(0.0, 0.0, 400.0, 5.0);
    // replace one fifth of the dwell points with far-wall hits along a
    // slightly offset direction
    for (std::size_t i = 4; i < pts.size(); i += 5) {
        pts[i].direction = dir_at(0.4);
        pts[i].position = pts[i].origin + pts[i].direction * (4.9 / pts[i].direction.z);
    }
    const auto ivdt = classify_ivdt(pts, {140.0, 5.75, 110.0, 4.9});
    const auto mivdt = classify_mivdt(pts, {140.0, 5.75, 110.0, 4.9});
    ASSERT_EQ(ivdt.fixations.size(), 1u);
    ASSERT_EQ(mivdt.fixations.size(), 1u);
    EXPECT_GT(ivdt.fixations[0].center.z, 2.5);  // polluted by the wall hits
    EXPECT_LT(mivdt.fixations[0].center.z, 2.4); // corrected
    EXPECT_TRUE(mivdt.fixations[0].corrected);
    EXPECT_EQ(ivdt.labels, mivdt.labels);
}

TEST(Mivdt, AllOutlierGroupFlagged) {
    auto pts = dwell(0.0, 0.0, 400.0, 5.0, 4.95); // every point beyond threshold
    for (auto& p : pts) p.position.z = 4.95;
    const auto out = classify_mivdt(pts, {140.0, 5.75, 110.0, 4.9});
    ASSERT_EQ(out.fixations.size(), 1u);
    EXPECT_TRUE(out.fixations[0].all_outliers);
    EXPECT_FALSE(out.fixations[0].corrected);
    EXPECT_NEAR(out.fixations[0].center.z, 4.95, 1e-12);
}

TEST(MergePostcondition, BoundaryModeLeavesNoMergeablePairs) {
    Rng rng(71);
    const ClassifyOptions boundary{MergeMode::Boundary};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<GazePoint> pts;
        double t = 0.0;
        for (int i = 0; i < 250; ++i) {
            pts.push_back(point_at(rng.uniform(-25, 25), t, 2.2, rng.uniform(0, 300)));
            t += kStep;
        }
        const ClassifierParams params{140.0, rng.uniform(2.0, 6.0), rng.uniform(30.0, 90.0), 4.9};
        const auto out = classify_ivdt(pts, params, boundary);
        for (std::size_t i = 0; i + 1 < out.fixations.size(); ++i) {
            const Fixation& f = out.fixations[i];
            const Fixation& g = out.fixations[i + 1];
            if (g.first_index == f.last_index + 1) continue; // no gap, nothing to merge over
            const double dd = angle_at_origin(pts[g.first_index].origin,
                                              pts[g.first_index].position,
                                              pts[f.last_index].position);
            const bool both_long = f.duration_ms > params.min_fixation_duration &&
                                   g.duration_ms > params.min_fixation_duration;
            EXPECT_FALSE(dd < params.dispersion_threshold && both_long)
                << "unmerged mergeable pair in trial " << trial;
        }
    }
}

// randomized small-instance equivalence against the straight-line reference
TEST(ReferenceEquivalence, RandomSmallSessions) {
    Rng rng(97);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 2 + rng.index(49);
        std::vector<GazePoint> pts;
        double t = 0.0;
        double ang = rng.uniform(-10, 10);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform01() < 0.25) ang = rng.uniform(-25, 25); // jump
            ang += rng.uniform(-0.3, 0.3);
            GazePoint p = point_at(ang, t, rng.uniform(1.5, 3.0));
            if (rng.uniform01() < 0.15) p.position.z = rng.uniform(4.9, 5.1); // outliers
            pts.push_back(p);
            t += rng.uniform(4.0, 14.0);
        }
        compute_velocities(pts);
        const double vel = rng.uniform(30, 150);
        const double dd = rng.uniform(1.0, 6.0);
        const double dur = rng.uniform(20, 150);
        for (bool boundary : {false, true}) {
            const ClassifyOptions opt{boundary ? MergeMode::Boundary : MergeMode::Centroid};
            const ref::RefOptions ropt{boundary};
            EXPECT_TRUE(streams_equal(classify_ivt(pts, {vel, dd, dur}), ref::ivt(pts, vel)));
            EXPECT_TRUE(streams_equal(classify_idt(pts, {vel, dd, dur}, opt),
                                      ref::idt(pts, dd, dur, ropt)));
            EXPECT_TRUE(streams_equal(classify_ivdt(pts, {vel, dd, dur}, opt),
                                      ref::ivdt(pts, vel, dd, dur, ropt)));
            // m-IVDT shares the grouping exactly
            const auto mi = classify_mivdt(pts, {vel, dd, dur, 4.9}, opt);
            const auto iv = classify_ivdt(pts, {vel, dd, dur, 4.9}, opt);
            EXPECT_EQ(mi.labels, iv.labels);
        }
    }
}
