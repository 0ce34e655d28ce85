#include "turbsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "turbsim/calibration.hpp"
#include "turbsim/error.hpp"

namespace turbsim {

ShiftSampleSet collect_shift_samples(const TurbulenceParams& params, int field_w, int field_h,
                                     int field_count, int spacing, std::uint64_t seed) {
    params.validate();
    if (field_count < 1) throw ParameterError("field_count must be >= 1");
    if (spacing < 1) throw ParameterError("spacing must be >= 1");
    if (field_w < 1 || field_h < 1) throw ParameterError("field dimensions must be >= 1");

    const int border = params.correlation_radius;
    const int x_end = field_w - border;  // exclusive
    const int y_end = field_h - border;
    if (x_end <= border || y_end <= border)
        throw ParameterError("field " + std::to_string(field_w) + "x" + std::to_string(field_h) +
                             " has no interior beyond a border of " + std::to_string(border) + " px");

    ShiftSampleSet set;
    set.spacing = spacing;
    set.field_count = field_count;
    const std::size_t per_field = static_cast<std::size_t>((x_end - border + spacing - 1) / spacing) *
                                  static_cast<std::size_t>((y_end - border + spacing - 1) / spacing);
    set.norms.reserve(per_field * field_count);
    set.components_u.reserve(per_field * field_count);
    set.components_v.reserve(per_field * field_count);

    for (int i = 0; i < field_count; ++i) {
        const auto field = generate_distortion_field(field_w, field_h, params, seed + static_cast<std::uint64_t>(i));
        for (int y = border; y < y_end; y += spacing) {
            for (int x = border; x < x_end; x += spacing) {
                const double u = field.du(x, y);
                const double v = field.dv(x, y);
                set.components_u.push_back(u);
                set.components_v.push_back(v);
                set.norms.push_back(std::hypot(u, v));
            }
        }
    }
    return set;
}

double rayleigh_cdf(double l, double sigma_z) {
    if (l <= 0.0) return 0.0;
    return -std::expm1(-l * l / (2.0 * sigma_z * sigma_z));
}

double rayleigh_ks(std::span<const double> norms, double sigma_z) {
    if (!(sigma_z > 0.0)) throw ParameterError("sigma_z must be > 0");
    if (norms.empty()) throw ParameterError("KS test needs at least one sample");

    std::vector<double> sorted(norms.begin(), norms.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = rayleigh_cdf(sorted[i], sigma_z);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double rayleigh_ks(const ShiftSampleSet& samples, double sigma_z) {
    return rayleigh_ks(std::span<const double>(samples.norms), sigma_z);
}

double empirical_sigma_z(const ShiftSampleSet& samples) {
    if (samples.size() == 0) throw ParameterError("empty sample set");
    double ss = 0.0;
    for (double u : samples.components_u) ss += u * u;
    for (double v : samples.components_v) ss += v * v;
    return std::sqrt(ss / static_cast<double>(samples.components_u.size() + samples.components_v.size()));
}

double mean_norm(const ShiftSampleSet& samples) {
    if (samples.size() == 0) throw ParameterError("empty sample set");
    double sum = 0.0;
    for (double l : samples.norms) sum += l;
    return sum / static_cast<double>(samples.size());
}

namespace {

bool within_relative(double empirical, double analytic, double tol) {
    if (analytic == 0.0) return empirical == 0.0;
    return std::abs(empirical / analytic - 1.0) <= tol;
}

}  // namespace

ValidationReport validate_model(const TurbulenceParams& params, const ValidationProtocol& protocol) {
    params.validate();
    const auto samples = collect_shift_samples(params, protocol.field_width, protocol.field_height,
                                               protocol.field_count, protocol.spacing, protocol.seed);

    ValidationReport r;
    r.gamma = params.gamma;
    r.sigma_d2 = params.sigma_d2;
    r.sample_count = samples.size();
    r.analytic_sigma_z = std::sqrt(component_variance(params.gamma, params.sigma_d2));
    r.analytic_mu_l = mean_pixel_shift(params.gamma, params.sigma_d2);
    r.empirical_sigma_z = empirical_sigma_z(samples);
    r.empirical_mu_l = mean_norm(samples);

    const double ks_sigma = protocol.sigma_z_override > 0.0 ? protocol.sigma_z_override : r.analytic_sigma_z;
    if (ks_sigma > 0.0) {
        r.ks_statistic = rayleigh_ks(samples, ks_sigma);
    } else {
        // Degenerate distribution at zero.
        const bool all_zero = std::all_of(samples.norms.begin(), samples.norms.end(), [](double l) { return l == 0.0; });
        r.ks_statistic = all_zero ? 0.0 : 1.0;
    }

    r.sigma_z_pass = within_relative(r.empirical_sigma_z, r.analytic_sigma_z, protocol.moment_tolerance);
    r.mu_l_pass = within_relative(r.empirical_mu_l, r.analytic_mu_l, protocol.moment_tolerance);
    r.ks_pass = r.ks_statistic <= protocol.ks_threshold;
    return r;
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
    j = nlohmann::json{
        {"gamma", r.gamma},
        {"sigma_d2", r.sigma_d2},
        {"empirical_sigma_z", r.empirical_sigma_z},
        {"analytic_sigma_z", r.analytic_sigma_z},
        {"empirical_mu_l", r.empirical_mu_l},
        {"analytic_mu_l", r.analytic_mu_l},
        {"ks_statistic", r.ks_statistic},
        {"sample_count", r.sample_count},
        {"pass", {{"sigma_z", r.sigma_z_pass}, {"mu_l", r.mu_l_pass}, {"ks", r.ks_pass}, {"all", r.pass()}}},
    };
}

}  // namespace turbsim
