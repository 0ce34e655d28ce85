#pragma once

#include <nlohmann/json_fwd.hpp>

namespace turbsim {

/// Pinhole camera intrinsics expressed as fields of view.
struct CameraModel {
    double hfov_deg = 45.0;
    double vfov_deg = 37.0;
    int width_px = 640;
    int height_px = 512;

    void validate() const;
};

/// Teledyne FLIR Tau 2 thermal core used for FLIR ADAS v2.
inline constexpr CameraModel kFlirTau2{45.0, 37.0, 640, 512};

struct RealWorldShift {
    double horizontal_m = 0.0;
    double vertical_m = 0.0;
};

struct CalibrationReport {
    double sigma_z = 0.0;  // px, per-component standard deviation
    double mu_l = 0.0;     // px, mean shift magnitude
    double t_h_m = 0.0;
    double t_v_m = 0.0;
    double depth_m = 0.0;
};

/// gamma^2 / (4 pi sigma_d2): variance of each shift component in px^2.
double component_variance(double gamma, double sigma_d2);

/// Mean norm of the shift vector, gamma / (2 sqrt(2) sigma_D), in px.
double mean_pixel_shift(double gamma, double sigma_d2);

/// Mean shift projected to meters at scene depth `depth_m`.
RealWorldShift real_world_shift(double gamma, double sigma_d2, double depth_m, const CameraModel& camera);

/// Inverse of the horizontal component of real_world_shift.
double gamma_for_shift(double target_h_m, double sigma_d2, double depth_m, const CameraModel& camera);

CalibrationReport calibrate(double gamma, double sigma_d2, double depth_m, const CameraModel& camera);

void to_json(nlohmann::json& j, const CalibrationReport& r);

}  // namespace turbsim
