#include "turbsim/calibration.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "turbsim/error.hpp"

namespace turbsim {

namespace {

void check_model_args(double gamma, double sigma_d2) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw ParameterError("gamma must be finite and >= 0");
    if (!std::isfinite(sigma_d2) || sigma_d2 <= 0.0) throw ParameterError("sigma_d2 must be > 0");
}

void check_depth(double depth_m) {
    if (!std::isfinite(depth_m) || depth_m <= 0.0) throw ParameterError("depth_m must be > 0");
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Meters per pixel of mean shift, per unit gamma, along one axis.
double axis_coefficient(double fov_deg, int pixels, double sigma_d2) {
    return std::tan(deg2rad(fov_deg) / 2.0) / (std::numbers::sqrt2 * std::sqrt(sigma_d2) * pixels);
}

}  // namespace

void CameraModel::validate() const {
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) throw ParameterError("hfov must be in (0, 180) degrees");
    if (!(vfov_deg > 0.0 && vfov_deg < 180.0)) throw ParameterError("vfov must be in (0, 180) degrees");
    if (width_px < 1 || height_px < 1) throw ParameterError("camera resolution must be >= 1");
}

double component_variance(double gamma, double sigma_d2) {
    check_model_args(gamma, sigma_d2);
    return gamma * gamma / (4.0 * std::numbers::pi * sigma_d2);
}

double mean_pixel_shift(double gamma, double sigma_d2) {
    check_model_args(gamma, sigma_d2);
    return gamma / (2.0 * std::numbers::sqrt2 * std::sqrt(sigma_d2));
}

RealWorldShift real_world_shift(double gamma, double sigma_d2, double depth_m, const CameraModel& camera) {
    check_model_args(gamma, sigma_d2);
    check_depth(depth_m);
    camera.validate();
    return {
        gamma * depth_m * axis_coefficient(camera.hfov_deg, camera.width_px, sigma_d2),
        gamma * depth_m * axis_coefficient(camera.vfov_deg, camera.height_px, sigma_d2),
    };
}

double gamma_for_shift(double target_h_m, double sigma_d2, double depth_m, const CameraModel& camera) {
    if (!std::isfinite(target_h_m) || target_h_m < 0.0) throw ParameterError("target shift must be >= 0");
    check_model_args(0.0, sigma_d2);
    check_depth(depth_m);
    camera.validate();
    return target_h_m / (depth_m * axis_coefficient(camera.hfov_deg, camera.width_px, sigma_d2));
}

CalibrationReport calibrate(double gamma, double sigma_d2, double depth_m, const CameraModel& camera) {
    const auto shift = real_world_shift(gamma, sigma_d2, depth_m, camera);
    const double sigma_z = std::sqrt(component_variance(gamma, sigma_d2));
    return {sigma_z, sigma_z * std::sqrt(std::numbers::pi / 2.0), shift.horizontal_m, shift.vertical_m, depth_m};
}

void to_json(nlohmann::json& j, const CalibrationReport& r) {
    j = nlohmann::json{{"sigma_z", r.sigma_z},
                       {"mu_l", r.mu_l},
                       {"t_h_m", r.t_h_m},
                       {"t_v_m", r.t_v_m},
                       {"depth_m", r.depth_m}};
}

}  // namespace turbsim
