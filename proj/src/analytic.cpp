#include "tbsim/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace tbsim {

double mu_correlated(double p, const SourceParams& src)
{
    if (!(p >= 0.0)) throw std::invalid_argument("mu_correlated: p must be >= 0");
    return src.a * p * p * src.time_bandwidth();
}

double mu_noise(double p, const SourceParams& src)
{
    if (!(p >= 0.0)) throw std::invalid_argument("mu_noise: p must be >= 0");
    return src.b * p * src.time_bandwidth();
}

PairStatistics pair_statistics(double p, const SourceParams& src)
{
    PairStatistics s;
    s.mu_c = mu_correlated(p, src);
    s.mu_n_s = s.mu_n_i = mu_noise(p, src);
    s.mu = s.mu_c + s.mu_n_s;
    return s;
}

double pump_power_for_mu(double mu, const SourceParams& src)
{
    if (!(mu >= 0.0)) throw std::invalid_argument("pump_power_for_mu: mu must be >= 0");
    if (mu == 0.0) return 0.0;
    const double x = src.time_bandwidth();
    if (!(x > 0.0)) throw std::invalid_argument("pump_power_for_mu: delta_f delta_t must be > 0");
    if (src.a <= 0.0) {
        if (src.b <= 0.0)
            throw std::domain_error("pump_power_for_mu: a = b = 0, no power reaches mu > 0");
        return mu / (src.b * x);
    }
    const double beta = src.b / src.a;
    const double g = mu / (src.a * x);
    return 2.0 * g / (beta + std::sqrt(beta * beta + 4.0 * g));
}

double symmetric_alpha(double alpha_s, double alpha_i) { return std::sqrt(alpha_s * alpha_i); }

double symmetric_dark(double d_s, double d_i) { return 0.5 * (d_s + d_i); }

double car_from_means(const PairStatistics& stats, double alpha, double d)
{
    if (stats.mu_c < 0.0 || stats.mu_n_s < 0.0 || stats.mu_n_i < 0.0 || alpha < 0.0 || d < 0.0)
        throw std::invalid_argument("car_from_means: inputs must be >= 0");
    const double mu_n = 0.5 * (stats.mu_n_s + stats.mu_n_i);
    const double denom = (stats.mu_c + mu_n) * alpha + d;
    if (denom <= 0.0) throw std::domain_error("car_from_means: no photons and no dark counts");
    return stats.mu_c * alpha * alpha / (denom * denom) + 1.0;
}

double car_closed_form(double mu, const SourceParams& src, double alpha, double d)
{
    if (mu < 0.0 || alpha < 0.0 || d < 0.0)
        throw std::invalid_argument("car_closed_form: inputs must be >= 0");
    const double singles = mu * alpha;
    if (singles + d <= 0.0) throw std::domain_error("car_closed_form: no photons and no dark counts");
    const double x = src.time_bandwidth();
    const double root = src.b + std::sqrt(src.b * src.b + 4.0 * src.a * mu / x);
    const double dilution = singles / (singles + d);
    return dilution * dilution * 4.0 * src.a / (x * root * root) + 1.0;
}

double predicted_visibility(const PairStatistics& stats, double alpha_s, double alpha_i,
                            double d_s, double d_i, std::int64_t n)
{
    if (stats.mu_c < 0.0 || stats.mu_n_s < 0.0 || stats.mu_n_i < 0.0 || alpha_s < 0.0 ||
        alpha_i < 0.0 || d_s < 0.0 || d_i < 0.0)
        throw std::invalid_argument("predicted_visibility: inputs must be >= 0");
    if (n < 2) throw std::invalid_argument("predicted_visibility: n must be >= 2");
    const double c = stats.mu_c * alpha_s * alpha_i / 4.0;
    const double acc = (stats.mu_signal() * alpha_s / 2.0 + d_s) *
                       (stats.mu_idler() * alpha_i / 2.0 + d_i);
    if (c + 2.0 * acc <= 0.0) throw std::domain_error("predicted_visibility: no coincidences");
    return static_cast<double>(n - 1) / static_cast<double>(n) * c / (c + 2.0 * acc);
}

double estimate_gamma(double a, double length_m)
{
    if (!(a > 0.0) || !(length_m > 0.0))
        throw std::invalid_argument("estimate_gamma: a and length must be > 0");
    return std::sqrt(a) / length_m;
}

}  // namespace tbsim
