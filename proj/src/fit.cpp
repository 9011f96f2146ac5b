#include "tbsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "tbsim/analytic.hpp"
#include "tbsim/rng.hpp"

namespace tbsim {

OriginFit fit_through_origin(const std::vector<double>& feature, const std::vector<double>& y)
{
    if (feature.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
    const std::size_t n = y.size();
    if (n < 2) throw std::invalid_argument("fit: need at least 2 points");
    double zz = 0.0, zy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        zz += feature[k] * feature[k];
        zy += feature[k] * y[k];
    }
    if (!(zz > 0.0)) throw std::invalid_argument("fit: all-zero design");
    OriginFit f;
    f.coef = zy / zz;
    double rss = 0.0, mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double tss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - f.coef * feature[k];
        rss += r * r;
        tss += (y[k] - mean) * (y[k] - mean);
    }
    f.sigma = std::sqrt(rss / static_cast<double>(n - 1) / zz);
    f.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    return f;
}

namespace {

OriginFit fit_power_series(const std::vector<PowerPoint>& pts, double x, int order, const char* name)
{
    if (pts.size() < 3) throw std::invalid_argument(std::string("fit_scaling: ") + name + " needs >= 3 points");
    bool distinct = false;
    for (const auto& p : pts) {
        if (!(p.power > 0.0))
            throw std::invalid_argument(std::string("fit_scaling: ") + name + " powers must be positive");
        if (p.power != pts.front().power) distinct = true;
    }
    if (!distinct) throw std::invalid_argument(std::string("fit_scaling: ") + name + " powers all equal");
    std::vector<double> z, y;
    for (const auto& p : pts) {
        z.push_back((order == 2 ? p.power * p.power : p.power) * x);
        y.push_back(p.mean);
    }
    return fit_through_origin(z, y);
}

}  // namespace

ScalingFit fit_scaling(const std::vector<PowerPoint>& pairs, const std::vector<PowerPoint>& noise_s,
                       const std::vector<PowerPoint>& noise_i, double delta_f_delta_t)
{
    if (!(delta_f_delta_t > 0.0)) throw std::invalid_argument("fit_scaling: delta_f_delta_t must be > 0");
    const OriginFit a = fit_power_series(pairs, delta_f_delta_t, 2, "pair series");
    const OriginFit bs = fit_power_series(noise_s, delta_f_delta_t, 1, "signal noise series");
    const OriginFit bi = fit_power_series(noise_i, delta_f_delta_t, 1, "idler noise series");
    ScalingFit f;
    f.a_hat = a.coef;
    f.a_var = a.sigma * a.sigma;
    f.a_r_squared = a.r_squared;
    f.b_hat_s = bs.coef;
    f.b_s_var = bs.sigma * bs.sigma;
    f.b_s_r_squared = bs.r_squared;
    f.b_hat_i = bi.coef;
    f.b_i_var = bi.sigma * bi.sigma;
    f.b_i_r_squared = bi.r_squared;
    return f;
}

FringeFit fit_fringe(const std::vector<FringeSample>& samples)
{
    if (samples.size() < 4) throw std::invalid_argument("fit_fringe: need at least 4 phase samples");
    double lo = samples.front().phi, hi = lo;
    for (const auto& s : samples) {
        if (!(s.counts >= 0.0)) throw std::invalid_argument("fit_fringe: counts must be >= 0");
        lo = std::min(lo, s.phi);
        hi = std::max(hi, s.phi);
    }
    if (!(hi - lo > std::numbers::pi)) throw std::invalid_argument("fit_fringe: phases must span more than pi");

    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& s : samples) {
        const Eigen::Vector3d row(1.0, std::cos(s.phi), std::sin(s.phi));
        const double w = 1.0 / std::max(s.counts, 1.0);
        normal += w * row * row.transpose();
        rhs += w * s.counts * row;
    }
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !(std::abs(ldlt.vectorD().minCoeff()) > 0.0))
        throw std::invalid_argument("fit_fringe: singular design");
    const Eigen::Vector3d coef = ldlt.solve(rhs);
    const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());

    const double A = coef(0), B = coef(1), C = coef(2);
    if (!(A > 0.0)) throw std::invalid_argument("fit_fringe: no signal (offset <= 0)");
    const double R = std::hypot(B, C);

    FringeFit f;
    f.mean_level = A;
    f.visibility = R / A;
    f.phase_offset = PhasePair::reduced(std::atan2(-C, B));
    if (f.visibility > 1.0) {
        // round-off above 1 is not flagged
        f.clamped = f.visibility > 1.0 + 1e-12;
        f.visibility = 1.0;
    }
    // gradient of V = R / A
    Eigen::Vector3d grad;
    if (R > 0.0)
        grad << -R / (A * A), B / (A * R), C / (A * R);
    else
        grad << 0.0, 1.0 / A, 1.0 / A;
    f.visibility_error = std::sqrt(std::max(0.0, grad.dot(cov * grad)));

    double chi2 = 0.0;
    for (const auto& s : samples) {
        const double model = A + B * std::cos(s.phi) + C * std::sin(s.phi);
        chi2 += (s.counts - model) * (s.counts - model) / std::max(s.counts, 1.0);
    }
    f.residual_norm = std::sqrt(chi2);
    return f;
}

double analytic_car(const ExperimentConfig& cfg, double mu)
{
    const double alpha = symmetric_alpha(effective_alpha(cfg.signal, false), effective_alpha(cfg.idler, false));
    const double d = symmetric_dark(dark_per_slot(cfg.signal, cfg.source.rep_rate),
                                    dark_per_slot(cfg.idler, cfg.source.rep_rate));
    return car_closed_form(mu, cfg.source, alpha, d);
}

std::vector<CarCurveRow> car_curve(const ExperimentConfig& cfg, const std::vector<double>& mu_values,
                                   const RunOptions& opt)
{
    for (std::size_t k = 0; k < mu_values.size(); ++k) {
        if (!(mu_values[k] > 0.0)) throw std::invalid_argument("car_curve: mu values must be positive");
        if (k > 0 && mu_values[k] < mu_values[k - 1]) throw std::invalid_argument("car_curve: mu values must be sorted");
    }
    std::vector<CarCurveRow> rows;
    for (std::size_t k = 0; k < mu_values.size(); ++k) {
        CarCurveRow row;
        row.mu = mu_values[k];
        row.peak_power = pump_power_for_mu(row.mu, cfg.source);
        row.car_analytic = analytic_car(cfg, row.mu);

        ExperimentConfig run_cfg = cfg;
        run_cfg.interferometers_present = false;
        run_cfg.source.peak_power = row.peak_power;
        run_cfg.seed = derive_seed(cfg.seed, k);
        row.histogram = simulate_car_run(run_cfg, opt);
        try {
            const CarEstimate est = estimate_car(row.histogram);
            row.car_simulated = est.value;
            row.car_simulated_error = est.std_error;
            row.simulated_ok = true;
        } catch (const InsufficientStatistics&) {
            row.simulated_ok = false;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tbsim
