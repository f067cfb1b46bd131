#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "gaze_events/vec3.hpp"

namespace gaze {

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Angle between two direction vectors in radians. The normalized dot
/// product is clamped to [-1, 1]; rounding can push it past 1 for
/// near-identical directions and arccos would return NaN.
inline double angle_between_rad(const Vec3& a, const Vec3& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0) || !finite(a) || !finite(b))
        throw ContractError("angle_between_rad(): zero-norm or non-finite direction");
    const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

/// Visual angle between two directions, in degrees. Result in [0, 180].
inline double visual_angle(const Vec3& a, const Vec3& b) {
    return angle_between_rad(a, b) * kRadToDeg;
}

/// Visual angle in degrees subtended at `origin` by points p and q.
inline double angle_at_origin(const Vec3& origin, const Vec3& p, const Vec3& q) {
    const Vec3 dp = p - origin;
    const Vec3 dq = q - origin;
    if (!(norm2(dp) > 0.0) || !(norm2(dq) > 0.0))
        throw ContractError("angle_at_origin(): point coincides with origin");
    return visual_angle(dp, dq);
}

struct Ray {
    Vec3 origin;
    Vec3 direction; // unit
};

struct Plane {
    Vec3 point;
    Vec3 normal; // unit
};

/// Intersection of a ray with a plane. Returns nullopt when the ray is
/// parallel to the plane (|n.d| < 1e-9) or the hit lies behind the origin.
inline std::optional<Vec3> ray_plane_intersection(const Ray& ray, const Plane& plane) {
    const double denom = dot(plane.normal, ray.direction);
    if (std::abs(denom) < 1e-9) return std::nullopt;
    const double t = dot(plane.normal, plane.point - ray.origin) / denom;
    if (t < 0.0) return std::nullopt;
    return ray.origin + ray.direction * t;
}

struct Sphere {
    Vec3 center;
    double radius{0.0};
};

// One closed axis-aligned room, optionally containing spheres. This covers
// the experiment environment: the default far wall sits at z = 4.9 in front
// of a viewer near the room center.
struct SceneGeometry {
    Vec3 room_min{-4.9, 0.0, -4.9};
    Vec3 room_max{4.9, 4.9, 4.9};
    std::vector<Sphere> spheres;

    bool contains(const Vec3& p, double eps = 1e-9) const {
        return p.x >= room_min.x - eps && p.x <= room_max.x + eps &&
               p.y >= room_min.y - eps && p.y <= room_max.y + eps &&
               p.z >= room_min.z - eps && p.z <= room_max.z + eps;
    }
};

/// Smallest positive t at which the ray leaves the room box. Assumes the
/// origin is inside the box.
inline double ray_box_exit_t(const Ray& ray, const SceneGeometry& scene) {
    double t_exit = std::numeric_limits<double>::infinity();
    const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double d[3] = {ray.direction.x, ray.direction.y, ray.direction.z};
    const double lo[3] = {scene.room_min.x, scene.room_min.y, scene.room_min.z};
    const double hi[3] = {scene.room_max.x, scene.room_max.y, scene.room_max.z};
    for (int i = 0; i < 3; ++i) {
        if (d[i] > 1e-12) {
            t_exit = std::min(t_exit, (hi[i] - o[i]) / d[i]);
        } else if (d[i] < -1e-12) {
            t_exit = std::min(t_exit, (lo[i] - o[i]) / d[i]);
        }
    }
    return t_exit;
}

/// Smallest positive t at which the ray hits the sphere, if any.
inline std::optional<double> ray_sphere_t(const Ray& ray, const Sphere& s) {
    const Vec3 oc = ray.origin - s.center;
    const double b = dot(ray.direction, oc);
    const double c = norm2(oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = -b - sq;
    if (t0 > 1e-9) return t0;
    const double t1 = -b + sq;
    if (t1 > 1e-9) return t1;
    return std::nullopt;
}

/// Nearest intersection of a gaze ray with the scene: the closest sphere hit
/// if there is one, otherwise the room wall. Always returns a point because
/// the room is closed. Throws if the ray origin is outside the room.
inline Vec3 ray_scene_intersection(const Ray& ray, const SceneGeometry& scene) {
    if (!scene.contains(ray.origin))
        throw ContractError("ray_scene_intersection(): ray origin outside the room");
    double t_hit = ray_box_exit_t(ray, scene);
    for (const Sphere& s : scene.spheres) {
        if (auto t = ray_sphere_t(ray, s); t && *t < t_hit) t_hit = *t;
    }
    return ray.origin + ray.direction * t_hit;
}

/// Arithmetic mean per component, accumulated left-to-right in input order.
inline Vec3 centroid(const std::vector<Vec3>& points) {
    if (points.empty()) throw ContractError("centroid(): empty point list");
    Vec3 sum;
    for (const Vec3& p : points) sum += p;
    return sum / static_cast<double>(points.size());
}

} // namespace gaze
