#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "turbsim/turbulence.hpp"

namespace turbsim {

/// Shift samples pooled from several independent fields on a sparse grid.
struct ShiftSampleSet {
    std::vector<double> norms;
    std::vector<double> components_u;
    std::vector<double> components_v;
    int spacing = 1;
    int field_count = 0;

    std::size_t size() const noexcept { return norms.size(); }
};

/// Generates `field_count` fields of field_w x field_h and samples them every
/// `spacing` pixels, skipping a border one correlation radius wide. Field i
/// uses seed + i.
ShiftSampleSet collect_shift_samples(const TurbulenceParams& params, int field_w, int field_h,
                                     int field_count, int spacing, std::uint64_t seed);

/// CDF of the Rayleigh distribution with scale sigma_z.
double rayleigh_cdf(double l, double sigma_z);

/// One-sample Kolmogorov-Smirnov statistic of `norms` against Rayleigh(sigma_z).
double rayleigh_ks(std::span<const double> norms, double sigma_z);
double rayleigh_ks(const ShiftSampleSet& samples, double sigma_z);

struct ValidationProtocol {
    int field_width = 640;
    int field_height = 512;
    int field_count = 50;
    int spacing = 32;
    std::uint64_t seed = 0;
    double moment_tolerance = 0.03;  // relative, for sigma_z and mu_l
    double ks_threshold = 0.02;
    /// If set, replaces the closed-form sigma_z used for the KS check.
    double sigma_z_override = 0.0;
};

struct ValidationReport {
    double gamma = 0.0;
    double sigma_d2 = 0.0;
    double empirical_sigma_z = 0.0;
    double analytic_sigma_z = 0.0;
    double empirical_mu_l = 0.0;
    double analytic_mu_l = 0.0;
    double ks_statistic = 0.0;
    std::size_t sample_count = 0;
    bool sigma_z_pass = false;
    bool mu_l_pass = false;
    bool ks_pass = false;

    bool pass() const noexcept { return sigma_z_pass && mu_l_pass && ks_pass; }
};

/// Pooled component standard deviation about zero (u and v together).
double empirical_sigma_z(const ShiftSampleSet& samples);
double mean_norm(const ShiftSampleSet& samples);

ValidationReport validate_model(const TurbulenceParams& params, const ValidationProtocol& protocol = {});

void to_json(nlohmann::json& j, const ValidationReport& r);

}  // namespace turbsim
