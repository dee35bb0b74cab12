#pragma once

#include <Eigen/Core>
#include <cmath>

namespace cct {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Per-axis quantities: three translational axes followed by the planar
// rotational axis.
using AxisVec = Eigen::Vector4d;

/// Task-space wrench: force on the translational axes, torque about the
/// planar rotation axis.
struct Wrench {
  Vec3 force = Vec3::Zero();
  double torque = 0.0;

  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  Wrench operator-() const { return {-force, -torque}; }
  Wrench operator*(double s) const { return {force * s, torque * s}; }
  Wrench& operator+=(const Wrench& o) {
    force += o.force;
    torque += o.torque;
    return *this;
  }
};

inline Wrench operator*(double s, const Wrench& w) { return w * s; }

inline bool is_finite(const Vec3& v) { return v.allFinite(); }
inline bool is_finite(const Wrench& w) { return w.force.allFinite() && std::isfinite(w.torque); }

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace cct
