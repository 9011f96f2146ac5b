#pragma once

#include <cstdint>

#include "tbsim/model.hpp"

namespace tbsim {

/// Mean photon numbers per pulse at one pump power.
struct PairStatistics {
    double mu_c = 0.0;
    double mu_n_s = 0.0;
    double mu_n_i = 0.0;
    double mu = 0.0;  // mu_c + mean noise

    double mu_signal() const { return mu_c + mu_n_s; }
    double mu_idler() const { return mu_c + mu_n_i; }
};

/// a p^2 (delta_f delta_t)
double mu_correlated(double p, const SourceParams& src);
/// b p (delta_f delta_t)
double mu_noise(double p, const SourceParams& src);

PairStatistics pair_statistics(double p, const SourceParams& src);

/// Non-negative root of a p^2 x + b p x = mu. Evaluated in the
/// cancellation-free form 2g / (beta + sqrt(beta^2 + 4g)), beta = b/a,
/// g = mu / (a x).
double pump_power_for_mu(double mu, const SourceParams& src);

/// Channel symmetrization for the symmetric-channel CAR formulas.
double symmetric_alpha(double alpha_s, double alpha_i);
double symmetric_dark(double d_s, double d_i);

/// CAR = mu_c alpha^2 / ((mu_c + mu_n) alpha + d)^2 + 1, with mu_n the mean
/// of the two channel noise levels.
double car_from_means(const PairStatistics& stats, double alpha, double d);

/// CAR at fixed mu with the pump power eliminated.
double car_closed_form(double mu, const SourceParams& src, double alpha, double d);

/// Raw two-photon fringe visibility with phase-insensitive accidentals:
///   V = (n-1)/n * C / (C + 2A)
///   C = mu_c alpha_s alpha_i / 4
///   A = (mu_s alpha_s / 2 + d_s)(mu_i alpha_i / 2 + d_i)
/// The alphas are end-to-end detection probabilities through the
/// interferometers, excluding the 1/2 port split (accounted for above).
double predicted_visibility(const PairStatistics& stats, double alpha_s, double alpha_i,
                            double d_s, double d_i, std::int64_t n);

/// Effective nonlinear coefficient assuming mu_c = (gamma p L)^2 delta_f delta_t,
/// i.e. gamma = sqrt(a) / L. Result in 1/(W m).
double estimate_gamma(double a, double length_m);

}  // namespace tbsim
