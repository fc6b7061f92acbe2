#pragma once

#include <optional>
#include <variant>

#include "carsynth/math.hpp"

namespace carsynth {

struct Resolution {
  int width = 512;
  int height = 512;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Pinhole camera. The orientation columns are the camera axes in world
/// space: right, down, forward (a right-handed frame, det = +1). Pixel (0, 0)
/// is the top-left corner of the image.
struct Camera {
  Vec3 position;
  Mat3 orientation;
  double vertical_fov_deg = 50.0;
  Resolution resolution;

  Vec3 right() const { return orientation.column(0); }
  Vec3 down() const { return orientation.column(1); }
  Vec3 up() const { return -orientation.column(1); }
  Vec3 forward() const { return orientation.column(2); }

  /// Focal length in pixels.
  double focal_px() const;
  double horizontal_fov_deg() const;

  /// World-space direction through raster position (u, v), unit length.
  Vec3 ray_direction(double u, double v) const;

  /// Throws OutOfRange when fov, resolution or orientation are invalid.
  void validate() const;
};

struct RasterPoint {
  double u = 0;
  double v = 0;
  double depth = 0;  // camera-space z
};

struct BehindCamera {};

using Projection = std::variant<RasterPoint, BehindCamera>;

Projection project_to_raster(const Camera& camera, const Vec3& p);

/// True when the projection lands in [0, width] x [0, height].
bool in_frame(const Camera& camera, const RasterPoint& rp);

/// Rodrigues rotation about a unit axis. Throws NonUnitAxis when
/// |axis| differs from 1 by more than 1e-9.
Mat3 rotation_matrix(const Vec3& axis, double angle);

struct CameraPlacement {
  Vec3 position;
  bool degenerate_center = false;  // pitch axis fell back to (1, 0, 0)
};

/// v = c + R(z, yaw) R(n_pitch, pitch) (c / |c|) d with
/// n_pitch = normalize(-c.y, c.x, 0).
CameraPlacement place_camera(const Vec3& c_main, double yaw, double pitch, double distance);

/// Roll-free look-at with world +z as the up reference (+x when looking
/// straight up or down). c_main lands on the frame center.
Camera aim_camera(const Vec3& position, const Vec3& c_main, double vertical_fov_deg,
                  Resolution resolution);

/// Rotates the view by theta1 about the camera up axis and theta2 about the
/// camera right axis. Position is unchanged.
Camera jitter_camera(const Camera& camera, double theta1, double theta2);

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace carsynth
