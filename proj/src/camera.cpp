#include "carsynth/camera.hpp"

#include <cmath>

#include "carsynth/error.hpp"

namespace carsynth {

double Camera::focal_px() const {
  return 0.5 * resolution.height / std::tan(0.5 * deg_to_rad(vertical_fov_deg));
}

double Camera::horizontal_fov_deg() const {
  return rad_to_deg(2.0 * std::atan(0.5 * resolution.width / focal_px()));
}

Vec3 Camera::ray_direction(double u, double v) const {
  const double f = focal_px();
  const Vec3 local{u - 0.5 * resolution.width, v - 0.5 * resolution.height, f};
  return normalize(orientation * local);
}

void Camera::validate() const {
  if (!(vertical_fov_deg > 10.0 && vertical_fov_deg < 120.0))
    throw Error(ErrorKind::OutOfRange, "vertical fov must lie in (10, 120) degrees");
  if (resolution.width <= 0 || resolution.height <= 0)
    throw Error(ErrorKind::OutOfRange, "resolution must be positive");
  if (max_abs_diff(orientation.transposed() * orientation, Mat3::identity()) > 1e-9 ||
      std::abs(orientation.determinant() - 1.0) > 1e-9)
    throw Error(ErrorKind::OutOfRange, "camera orientation must be a rotation");
}

Projection project_to_raster(const Camera& camera, const Vec3& p) {
  const Vec3 local = camera.orientation.transposed() * (p - camera.position);
  if (local.z <= 0) return BehindCamera{};
  const double f = camera.focal_px();
  return RasterPoint{0.5 * camera.resolution.width + f * local.x / local.z,
                     0.5 * camera.resolution.height + f * local.y / local.z, local.z};
}

bool in_frame(const Camera& camera, const RasterPoint& rp) {
  return rp.u >= 0 && rp.u <= camera.resolution.width && rp.v >= 0 && rp.v <= camera.resolution.height;
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  if (std::abs(length(axis) - 1.0) > 1e-9)
    throw Error(ErrorKind::NonUnitAxis, "rotation axis must be unit length");
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const double x = axis.x, y = axis.y, z = axis.z;
  Mat3 r;
  r.m = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
         t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
         t * x * z - s * y, t * y * z + s * x, t * z * z + c};
  return r;
}

CameraPlacement place_camera(const Vec3& c_main, double yaw, double pitch, double distance) {
  const double norm = length(c_main);
  if (!(norm > 0)) throw Error(ErrorKind::CoincidentPoints, "damage center at the origin");
  if (!(distance > 0)) throw Error(ErrorKind::OutOfRange, "camera distance must be positive");

  CameraPlacement placement;
  Vec3 pitch_axis{-c_main.y, c_main.x, 0.0};
  const double axis_len = length(pitch_axis);
  if (axis_len < 1e-12 * norm) {
    pitch_axis = {1.0, 0.0, 0.0};
    placement.degenerate_center = true;
  } else {
    pitch_axis = pitch_axis / axis_len;
  }
  const Mat3 rot = rotation_matrix({0.0, 0.0, 1.0}, yaw) * rotation_matrix(pitch_axis, pitch);
  placement.position = c_main + (rot * (c_main / norm)) * distance;
  return placement;
}

Camera aim_camera(const Vec3& position, const Vec3& c_main, double vertical_fov_deg,
                  Resolution resolution) {
  const Vec3 delta = c_main - position;
  if (!(length(delta) > 0)) throw Error(ErrorKind::CoincidentPoints, "camera sits on its target");
  const Vec3 forward = normalize(delta);
  Vec3 up_ref{0, 0, 1};
  if (std::abs(dot(forward, up_ref)) > 1.0 - 1e-9) up_ref = {1, 0, 0};
  const Vec3 right = normalize(cross(forward, up_ref));
  const Vec3 down = cross(forward, right);

  Camera cam;
  cam.position = position;
  cam.orientation = Mat3::from_columns(right, down, forward);
  cam.vertical_fov_deg = vertical_fov_deg;
  cam.resolution = resolution;
  cam.validate();
  return cam;
}

Camera jitter_camera(const Camera& camera, double theta1, double theta2) {
  const double half_v = 0.5 * deg_to_rad(camera.vertical_fov_deg);
  const double half_h = 0.5 * deg_to_rad(camera.horizontal_fov_deg());
  if (std::abs(theta1) >= half_h || std::abs(theta2) >= half_v)
    throw Error(ErrorKind::JitterExceedsFov, "jitter angle exceeds half the field of view");
  // Local axes: x right, y down, z forward. "Up" is -y.
  Camera out = camera;
  out.orientation = camera.orientation * rotation_matrix({0, -1, 0}, theta1) *
                    rotation_matrix({1, 0, 0}, theta2);
  return out;
}

}  // namespace carsynth
