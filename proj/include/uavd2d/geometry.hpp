#ifndef UAVD2D_GEOMETRY_HPP
#define UAVD2D_GEOMETRY_HPP

#include <cmath>

namespace uavd2d {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double distance2(const Vec3& a, const Vec3& b) { return (a - b).norm2(); }

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Point at most max_step along the segment from -> to.
inline Vec3 step_toward(const Vec3& from, const Vec3& to, double max_step) {
    const double d = distance(from, to);
    if (d <= max_step) return to;
    return from + (to - from) * (max_step / d);
}

}  // namespace uavd2d

#endif
