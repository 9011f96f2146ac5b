#pragma once

#include <cstdint>
#include <vector>

#include "tbsim/model.hpp"
#include "tbsim/montecarlo.hpp"

namespace tbsim {

struct PowerPoint {
    double power = 0.0;  // W
    double mean = 0.0;   // photons per pulse
};

/// y = coef * feature, no intercept.
struct OriginFit {
    double coef = 0.0;
    double sigma = 0.0;      // 1 sigma from residual variance
    double r_squared = 0.0;  // centered
};

OriginFit fit_through_origin(const std::vector<double>& feature, const std::vector<double>& y);

struct ScalingFit {
    double a_hat = 0.0;
    double b_hat_s = 0.0;
    double b_hat_i = 0.0;
    double a_var = 0.0;
    double b_s_var = 0.0;
    double b_i_var = 0.0;
    double a_r_squared = 0.0;
    double b_s_r_squared = 0.0;
    double b_i_r_squared = 0.0;
};

/// Quadratic fit mu_c = a p^2 x and linear fits mu_n = b p x per channel.
/// The three series are independent one-parameter fits, so the covariance is
/// diagonal.
ScalingFit fit_scaling(const std::vector<PowerPoint>& pairs, const std::vector<PowerPoint>& noise_s,
                       const std::vector<PowerPoint>& noise_i, double delta_f_delta_t);

struct FringeSample {
    double phi = 0.0;
    double counts = 0.0;
};

struct FringeFit {
    double visibility = 0.0;
    double phase_offset = 0.0;  // [0, 2pi)
    double mean_level = 0.0;
    double visibility_error = 0.0;
    double residual_norm = 0.0;  // sqrt of weighted residual sum of squares
    bool clamped = false;        // raw visibility exceeded 1
};

/// counts = A (1 + V cos(phi + phi0)), linearized to A + B cos(phi) + C sin(phi)
/// and solved by weighted least squares with Poisson weights 1/max(counts, 1).
FringeFit fit_fringe(const std::vector<FringeSample>& samples);

struct CarCurveRow {
    double mu = 0.0;
    double peak_power = 0.0;
    double car_analytic = 0.0;
    double car_simulated = 0.0;
    double car_simulated_error = 0.0;
    bool simulated_ok = false;  // false on insufficient statistics
    CoincidenceHistogram histogram;
};

/// Analytic and Monte Carlo CAR at each mu. Row k runs with seed
/// derive_seed(cfg.seed, k).
std::vector<CarCurveRow> car_curve(const ExperimentConfig& cfg, const std::vector<double>& mu_values,
                                   const RunOptions& opt = {});

/// Analytic CAR for a configuration at mean photon number mu, with the
/// channels symmetrized (geometric-mean alpha, mean dark probability).
double analytic_car(const ExperimentConfig& cfg, double mu);

}  // namespace tbsim
