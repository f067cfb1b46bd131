#include <gtest/gtest.h>

#include "gaze_events/protocol.hpp"

using namespace gaze;

TEST(GenerateProtocol, SingleTaskDefaultsGive21TargetsInsideCube) {
    ProtocolOptions opt;
    opt.seed = 1;
    const StimulusProtocol p = generate_protocol(opt);
    ASSERT_EQ(p.targets.size(), 21u);
    EXPECT_EQ(p.targets[0].position, (Vec3{0, 1.2, 2.2})); // vision center first
    for (const auto& t : p.targets) {
        EXPECT_GE(t.position.x, -0.8);
        EXPECT_LE(t.position.x, 0.8);
        EXPECT_GE(t.position.y, 0.4);
        EXPECT_LE(t.position.y, 2.0);
        EXPECT_GE(t.position.z, 1.4);
        EXPECT_LE(t.position.z, 3.0);
    }
    // onsets chain without gaps
    for (std::size_t i = 0; i + 1 < p.targets.size(); ++i)
        EXPECT_DOUBLE_EQ(p.targets[i + 1].onset_ms, p.targets[i].onset_ms + p.targets[i].dwell_ms);
    EXPECT_EQ(p.scene.spheres.size(), 21u);
}

TEST(GenerateProtocol, SameSeedSameProtocol) {
    ProtocolOptions opt;
    opt.seed = 42;
    const StimulusProtocol a = generate_protocol(opt);
    const StimulusProtocol b = generate_protocol(opt);
    ASSERT_EQ(a.targets.size(), b.targets.size());
    for (std::size_t i = 0; i < a.targets.size(); ++i)
        EXPECT_EQ(a.targets[i].position, b.targets[i].position);
}

TEST(GenerateProtocol, SingleTargetCountTooSmallThrows) {
    ProtocolOptions opt;
    opt.n_targets = 1;
    EXPECT_THROW(generate_protocol(opt), InvalidConfigurationError);
}

TEST(GenerateProtocol, CubeOutsideRoomThrows) {
    ProtocolOptions opt;
    opt.cube_center = {0, 1.2, 4.8}; // cube would pierce the far wall
    EXPECT_THROW(generate_protocol(opt), InvalidConfigurationError);
}

TEST(GenerateProtocol, MultiTaskStartsAtCenterAndVisitsEachSphereOnce) {
    ProtocolOptions opt;
    opt.task_kind = TaskKind::MultiTarget;
    opt.seed = 9;
    const StimulusProtocol p = generate_protocol(opt);
    ASSERT_EQ(p.targets.size(), 20u);
    EXPECT_EQ(p.targets[0].position, (Vec3{0, 1.2, 2.2}));
    EXPECT_EQ(p.scene.spheres.size(), 20u);
    for (const auto& t : p.targets) {
        std::size_t count = 0;
        for (const auto& u : p.targets)
            if (u.position == t.position) ++count;
        EXPECT_EQ(count, 1u);
    }
}

TEST(StimulusSaccades, CountAndAmplitudes) {
    ProtocolOptions opt;
    opt.seed = 3;
    const StimulusProtocol p = generate_protocol(opt);
    const auto saccades = stimulus_saccades(p);
    EXPECT_EQ(saccades.size(), 20u); // 21 targets -> 20 saccades
    for (const auto& s : saccades) EXPECT_GT(s.amplitude_deg, 0.0);
}

TEST(StimulusSaccades, NinetyDegreeOracle) {
    StimulusProtocol p;
    p.viewer_origin = {0, 0, 0};
    p.targets = {{{1, 0, 1}, 0, 1500}, {{-1, 0, 1}, 1500, 1500}};
    const auto saccades = stimulus_saccades(p);
    ASSERT_EQ(saccades.size(), 1u);
    EXPECT_NEAR(saccades[0].amplitude_deg, 90.0, 1e-9);
}

TEST(StimulusSaccades, CoincidentTargetsFlaggedDegenerate) {
    StimulusProtocol p;
    p.targets = {{{0, 1.2, 2.2}, 0, 1500}, {{0, 1.2, 2.2}, 1500, 1500}};
    const auto saccades = stimulus_saccades(p);
    ASSERT_EQ(saccades.size(), 1u);
    EXPECT_TRUE(saccades[0].degenerate);
    EXPECT_DOUBLE_EQ(saccades[0].amplitude_deg, 0.0);
}

TEST(ProtocolJson, RoundTripsFieldForField) {
    ProtocolOptions opt;
    opt.task_kind = TaskKind::MultiTarget;
    opt.seed = 77;
    const StimulusProtocol p = generate_protocol(opt);
    const StimulusProtocol q = protocol_from_json(to_json(p));
    EXPECT_EQ(q.task_kind, p.task_kind);
    EXPECT_EQ(q.viewer_origin, p.viewer_origin);
    EXPECT_EQ(q.scene.room_min, p.scene.room_min);
    EXPECT_EQ(q.scene.room_max, p.scene.room_max);
    ASSERT_EQ(q.scene.spheres.size(), p.scene.spheres.size());
    for (std::size_t i = 0; i < q.scene.spheres.size(); ++i) {
        EXPECT_EQ(q.scene.spheres[i].center, p.scene.spheres[i].center);
        EXPECT_EQ(q.scene.spheres[i].radius, p.scene.spheres[i].radius);
    }
    ASSERT_EQ(q.targets.size(), p.targets.size());
    for (std::size_t i = 0; i < q.targets.size(); ++i) {
        EXPECT_EQ(q.targets[i].position, p.targets[i].position);
        EXPECT_EQ(q.targets[i].onset_ms, p.targets[i].onset_ms);
        EXPECT_EQ(q.targets[i].dwell_ms, p.targets[i].dwell_ms);
    }
}

TEST(GenerateProtocol, PositionsUniformByOctantChiSquare) {
    // 1e4 draws, 8 octants of the cube; chi-square must stay below the
    // p = 0.001 critical value for 7 degrees of freedom
    std::size_t counts[8] = {};
    std::size_t total = 0;
    for (std::uint64_t seed = 0; total < 10000; ++seed) {
        ProtocolOptions opt;
        opt.seed = seed;
        opt.n_targets = 50;
        const StimulusProtocol p = generate_protocol(opt);
        for (std::size_t i = 1; i < p.targets.size() && total < 10000; ++i) {
            const Vec3& v = p.targets[i].position;
            const int oct = (v.x > 0.0) | ((v.y > 1.2) << 1) | ((v.z > 2.2) << 2);
            ++counts[oct];
            ++total;
        }
    }
    const double expected = total / 8.0;
    double chi2 = 0.0;
    for (std::size_t c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 24.322);
}
