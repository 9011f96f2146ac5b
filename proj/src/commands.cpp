#include "tbsim/commands.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "tbsim/analytic.hpp"
#include "tbsim/fit.hpp"
#include "tbsim/io.hpp"
#include "tbsim/montecarlo.hpp"
#include "tbsim/rng.hpp"

namespace tbsim {

using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Loads (or defaults) the config and reports violations on err.
std::optional<ExperimentConfig> resolve_config(const std::optional<std::filesystem::path>& path,
                                               std::ostream& err)
{
    try {
        return path ? load_config(*path) : default_config();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
}

bool check_config(const ExperimentConfig& cfg, std::ostream& err)
{
    const auto violations = validate(cfg);
    for (const auto& v : violations) err << "invalid config: " << v.field << ": " << v.message << '\n';
    return violations.empty();
}

class OutputSet {
public:
    OutputSet(std::filesystem::path dir, std::string command, std::vector<std::string> argv)
        : dir_(std::move(dir))
    {
        manifest_.command = std::move(command);
        manifest_.arguments = std::move(argv);
    }

    void write(const std::string& name, const std::string& contents)
    {
        write_file(dir_ / name, contents);
        manifest_.outputs.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void finish(const ExperimentConfig& cfg)
    {
        write_json("config.json", config_to_json(cfg));
        manifest_.config_hash = config_hash(cfg);
        manifest_.seed = cfg.seed;
        write_file(dir_ / "manifest.json", manifest_to_json(manifest_).dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
    RunManifest manifest_;
};

std::string histogram_csv(const CoincidenceHistogram& h)
{
    std::string out = "delay,counts\n";
    for (int d = -h.half_width; d <= h.half_width; ++d) out += fmt::format("{},{}\n", d, h.at(d));
    return out;
}

void apply_run_overrides(ExperimentConfig& cfg, const std::optional<std::uint64_t>& pulses,
                         const std::optional<std::uint64_t>& seed,
                         const std::optional<std::string>& unit)
{
    if (pulses) cfg.num_pulses = *pulses;
    if (seed) cfg.seed = *seed;
    if (unit) cfg.pulse_count_unit = pulse_count_unit_from_string(*unit);
}

std::vector<double> sweep_grid(double from, double to, int steps, bool log_spacing)
{
    std::vector<double> v;
    if (steps == 1) return {from};
    for (int k = 0; k < steps; ++k) {
        const double f = static_cast<double>(k) / (steps - 1);
        v.push_back(log_spacing ? from * std::pow(to / from, f) : from + (to - from) * f);
    }
    v.back() = to;
    return v;
}

}  // namespace

int cmd_analytic(const AnalyticArgs& args, const std::vector<std::string>& argv, std::ostream& err)
{
    auto cfg_opt = resolve_config(args.config, err);
    if (!cfg_opt || !check_config(*cfg_opt, err)) return kExitUsage;
    const ExperimentConfig cfg = *cfg_opt;

    if (args.steps < 1) {
        err << "error: zero-length sweep (steps must be >= 1)\n";
        return kExitUsage;
    }
    if (!(args.from > 0.0) || !(args.to >= args.from)) {
        err << "error: sweep range must satisfy 0 < from <= to\n";
        return kExitUsage;
    }
    if (args.sweep != "mu" && args.sweep != "power" && args.sweep != "dfdt") {
        err << "error: --sweep must be mu, power or dfdt\n";
        return kExitUsage;
    }
    const std::string column = args.sweep == "power" ? "peak_power" : args.sweep;

    const double as = effective_alpha(cfg.signal, false), ai = effective_alpha(cfg.idler, false);
    const double as_mzi = effective_alpha(cfg.signal, true), ai_mzi = effective_alpha(cfg.idler, true);
    const double ds = dark_per_slot(cfg.signal, cfg.source.rep_rate);
    const double di = dark_per_slot(cfg.idler, cfg.source.rep_rate);
    const double fixed_mu = args.mu.value_or(pair_statistics(cfg.source.peak_power, cfg.source).mu);

    std::string csv = column + ",mu_c,mu_n,car,predicted_visibility\n";
    try {
        for (double v : sweep_grid(args.from, args.to, args.steps, args.log_spacing)) {
            SourceParams src = cfg.source;
            double p = 0.0;
            if (args.sweep == "mu") {
                p = pump_power_for_mu(v, src);
            } else if (args.sweep == "power") {
                p = v;
            } else {
                src.delta_t = v / src.delta_f;
                p = pump_power_for_mu(fixed_mu, src);
            }
            const PairStatistics st = pair_statistics(p, src);
            const double car = car_from_means(st, symmetric_alpha(as, ai), symmetric_dark(ds, di));
            const double vis = predicted_visibility(st, as_mzi, ai_mzi, ds, di, cfg.coherence_slots);
            csv += fmt::format("{},{},{},{},{}\n", v, st.mu_c, 0.5 * (st.mu_n_s + st.mu_n_i), car, vis);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    OutputSet out(args.out_dir, "analytic", argv);
    out.write("analytic.csv", csv);
    out.finish(cfg);
    return 0;
}

int cmd_mc_car(const McCarArgs& args, const std::vector<std::string>& argv, std::ostream& err)
{
    auto cfg_opt = resolve_config(args.config, err);
    if (!cfg_opt) return kExitUsage;
    ExperimentConfig cfg = *cfg_opt;
    try {
        apply_run_overrides(cfg, args.pulses, args.seed, args.pulse_unit);
        cfg.interferometers_present = false;
        if (args.mu) cfg.source.peak_power = pump_power_for_mu(*args.mu, cfg.source);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!check_config(cfg, err)) return kExitUsage;

    CoincidenceHistogram hist;
    try {
        hist = simulate_car_run(cfg, RunOptions{args.threads});
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    OutputSet out(args.out_dir, "mc-car", argv);
    out.write("histogram.csv", histogram_csv(hist));
    json report{{"pulses", cfg.num_pulses},
                {"pulse_count_unit", to_string(cfg.pulse_count_unit)},
                {"pump_pulses", hist.num_pulses},
                {"start_events", hist.start_events},
                {"seed", cfg.seed},
                {"mu", pair_statistics(cfg.source.peak_power, cfg.source).mu},
                {"car_analytic", analytic_car(cfg, pair_statistics(cfg.source.peak_power, cfg.source).mu)}};
    int status = 0;
    try {
        const CarEstimate est = estimate_car(hist);
        report["car"] = est.value;
        report["stderr"] = est.std_error;
    } catch (const InsufficientStatistics& e) {
        report["error"] = e.what();
        err << "error: " << e.what() << '\n';
        status = kExitFailure;
    }
    out.write_json("car.json", report);
    out.finish(cfg);
    return status;
}

int cmd_mc_fringe(const McFringeArgs& args, const std::vector<std::string>& argv, std::ostream& err)
{
    auto cfg_opt = resolve_config(args.config, err);
    if (!cfg_opt) return kExitUsage;
    ExperimentConfig cfg = *cfg_opt;
    if (args.steps < 4) {
        err << "error: --steps must be >= 4\n";
        return kExitUsage;
    }
    double phi_i = 0.0;
    try {
        phi_i = parse_phase(args.phi_i);
        apply_run_overrides(cfg, args.pulses, args.seed, args.pulse_unit);
        cfg.interferometers_present = true;
        if (args.mu) cfg.source.peak_power = pump_power_for_mu(*args.mu, cfg.source);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    cfg.phases.phi_i = phi_i;
    if (!check_config(cfg, err)) return kExitUsage;

    std::vector<FringeSample> samples;
    std::string csv = "phi_s,coincidences\n";
    try {
        for (int k = 0; k < args.steps; ++k) {
            const double phi_s = 2.0 * std::numbers::pi * k / args.steps;
            ExperimentConfig run_cfg = cfg;
            run_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
            const FringeRun run = simulate_fringe_run(run_cfg, {phi_s, phi_i}, RunOptions{args.threads});
            samples.push_back({phi_s, static_cast<double>(run.coincidences)});
            csv += fmt::format("{},{}\n", phi_s, run.coincidences);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    OutputSet out(args.out_dir, "mc-fringe", argv);
    out.write("fringe.csv", csv);
    const PairStatistics st = pair_statistics(cfg.source.peak_power, cfg.source);
    json report{{"phi_i", phi_i},
                {"steps", args.steps},
                {"pulses", cfg.num_pulses},
                {"pulse_count_unit", to_string(cfg.pulse_count_unit)},
                {"seed", cfg.seed},
                {"predicted_visibility",
                 predicted_visibility(st, effective_alpha(cfg.signal, true), effective_alpha(cfg.idler, true),
                                      dark_per_slot(cfg.signal, cfg.source.rep_rate),
                                      dark_per_slot(cfg.idler, cfg.source.rep_rate), cfg.coherence_slots)}};
    int status = 0;
    try {
        const FringeFit f = fit_fringe(samples);
        report["visibility"] = f.visibility;
        report["visibility_error"] = f.visibility_error;
        report["phase_offset"] = f.phase_offset;
        report["mean_level"] = f.mean_level;
        report["residual_norm"] = f.residual_norm;
        report["clamped"] = f.clamped;
    } catch (const std::exception& e) {
        report["error"] = e.what();
        err << "error: " << e.what() << '\n';
        status = kExitFailure;
    }
    out.write_json("fringe_fit.json", report);
    out.finish(cfg);
    return status;
}

namespace {

json fit_fringe_csv(const CsvTable& t)
{
    const std::size_t c_phi = t.column("phi_s");
    const std::size_t c_counts = t.column("coincidences");
    std::vector<FringeSample> samples;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        samples.push_back({t.number(r, c_phi), t.number(r, c_counts)});
    const FringeFit f = fit_fringe(samples);
    return json{{"model", "fringe"},
                {"visibility", f.visibility},
                {"visibility_error", f.visibility_error},
                {"phase_offset", f.phase_offset},
                {"mean_level", f.mean_level},
                {"residual_norm", f.residual_norm},
                {"clamped", f.clamped}};
}

json fit_scaling_csv(const CsvTable& t, double dfdt)
{
    const std::size_t c_series = t.column("series");
    const std::size_t c_power = t.column("power_w");
    const std::size_t c_mean = t.column("mean_per_pulse");
    std::vector<PowerPoint> pairs, ns, ni;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const PowerPoint p{t.number(r, c_power), t.number(r, c_mean)};
        const std::string& s = t.rows[r][c_series];
        if (s == "pair")
            pairs.push_back(p);
        else if (s == "noise_signal")
            ns.push_back(p);
        else if (s == "noise_idler")
            ni.push_back(p);
        else
            throw std::runtime_error("row " + std::to_string(r + 1) + ", column 'series': '" + s +
                                     "' is not pair, noise_signal or noise_idler");
    }
    const ScalingFit f = fit_scaling(pairs, ns, ni, dfdt);
    return json{{"model", "scaling"},
                {"delta_f_delta_t", dfdt},
                {"a_hat", f.a_hat},
                {"a_stderr", std::sqrt(f.a_var)},
                {"b_hat_s", f.b_hat_s},
                {"b_s_stderr", std::sqrt(f.b_s_var)},
                {"b_hat_i", f.b_hat_i},
                {"b_i_stderr", std::sqrt(f.b_i_var)},
                {"covariance", {{"a", f.a_var}, {"b_s", f.b_s_var}, {"b_i", f.b_i_var}}},
                {"r_squared", {{"a", f.a_r_squared}, {"b_s", f.b_s_r_squared}, {"b_i", f.b_i_r_squared}}}};
}

}  // namespace

int cmd_fit(const FitArgs& args, const std::vector<std::string>& argv, std::ostream& err)
{
    auto cfg_opt = resolve_config(args.config, err);
    if (!cfg_opt) return kExitUsage;
    const ExperimentConfig cfg = *cfg_opt;
    if (args.model != "fringe" && args.model != "scaling") {
        err << "error: --model must be fringe or scaling\n";
        return kExitUsage;
    }
    json report;
    try {
        const CsvTable t = read_csv(args.data);
        if (t.rows.empty()) throw std::runtime_error("'" + args.data.string() + "' has no data rows");
        report = args.model == "fringe" ? fit_fringe_csv(t)
                                        : fit_scaling_csv(t, args.dfdt.value_or(cfg.source.time_bandwidth()));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    OutputSet out(args.out_dir, "fit", argv);
    out.write_json("fit.json", report);
    out.finish(cfg);
    return 0;
}

int cmd_car_curve(const CarCurveArgs& args, const std::vector<std::string>& argv, std::ostream& err)
{
    auto cfg_opt = resolve_config(args.config, err);
    if (!cfg_opt) return kExitUsage;
    ExperimentConfig cfg = *cfg_opt;
    std::vector<CarCurveRow> rows;
    try {
        apply_run_overrides(cfg, args.pulses, args.seed, args.pulse_unit);
        cfg.interferometers_present = false;
        if (!check_config(cfg, err)) return kExitUsage;
        if (args.mu_values.empty()) throw std::invalid_argument("no mu values given");
        rows = car_curve(cfg, args.mu_values, RunOptions{args.threads});
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::string csv = "mu,peak_power,car_analytic,car_simulated,car_simulated_stderr\n";
    bool all_ok = true;
    for (const auto& r : rows) {
        if (r.simulated_ok)
            csv += fmt::format("{},{},{},{},{}\n", r.mu, r.peak_power, r.car_analytic, r.car_simulated,
                               r.car_simulated_error);
        else
            csv += fmt::format("{},{},{},,\n", r.mu, r.peak_power, r.car_analytic);
        all_ok = all_ok && r.simulated_ok;
    }
    OutputSet out(args.out_dir, "car-curve", argv);
    out.write("car_curve.csv", csv);
    out.finish(cfg);
    if (!all_ok) err << "error: insufficient statistics in at least one row\n";
    return all_ok ? 0 : kExitFailure;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Time-bin entangled photon-pair source: analytic model, Monte Carlo, fits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    AnalyticArgs an;
    std::string an_config;
    auto* analytic = app.add_subcommand("analytic", "Closed-form sweep of CAR and predicted visibility");
    analytic->add_option("--config", an_config, "Experiment config JSON");
    analytic->add_option("--sweep", an.sweep, "Swept variable: mu, power or dfdt")->check(CLI::IsMember({"mu", "power", "dfdt"}));
    analytic->add_option("--from", an.from, "First sweep value")->required();
    analytic->add_option("--to", an.to, "Last sweep value (defaults to --from)");
    analytic->add_option("--steps", an.steps, "Number of sweep points")->required();
    analytic->add_flag("--log", an.log_spacing, "Logarithmic spacing");
    analytic->add_option("--mu", an.mu, "Mean photon number per pulse for dfdt sweeps");
    analytic->add_option("--out-dir", an.out_dir, "Output directory");

    McCarArgs car;
    std::string car_config;
    auto* mc_car = app.add_subcommand("mc-car", "Monte Carlo CAR measurement (no interferometers)");
    mc_car->add_option("--config", car_config, "Experiment config JSON");
    mc_car->add_option("--pulses", car.pulses, "Run length M (see --pulse-unit)");
    mc_car->add_option("--seed", car.seed, "RNG seed");
    mc_car->add_option("--mu", car.mu, "Set the pump power for this mean photon number per pulse");
    mc_car->add_option("--pulse-unit", car.pulse_unit, "start_events or pump_pulses");
    mc_car->add_option("--threads", car.threads, "Worker threads (0: OpenMP default)");
    mc_car->add_option("--out-dir", car.out_dir, "Output directory");

    McFringeArgs fr;
    std::string fr_config;
    auto* mc_fringe = app.add_subcommand("mc-fringe", "Monte Carlo two-photon interference fringe");
    mc_fringe->add_option("--config", fr_config, "Experiment config JSON");
    mc_fringe->add_option("--phi-i", fr.phi_i, "Idler interferometer phase (radians, or pi expression)");
    mc_fringe->add_option("--steps", fr.steps, "Signal phase steps over [0, 2pi)");
    mc_fringe->add_option("--pulses", fr.pulses, "Run length M per phase step");
    mc_fringe->add_option("--seed", fr.seed, "RNG seed");
    mc_fringe->add_option("--mu", fr.mu, "Set the pump power for this mean photon number per pulse");
    mc_fringe->add_option("--pulse-unit", fr.pulse_unit, "start_events or pump_pulses");
    mc_fringe->add_option("--threads", fr.threads, "Worker threads (0: OpenMP default)");
    mc_fringe->add_option("--out-dir", fr.out_dir, "Output directory");

    FitArgs fit;
    std::string fit_config;
    auto* fit_cmd = app.add_subcommand("fit", "Fit scaling or fringe data from CSV");
    fit_cmd->add_option("data", fit.data, "CSV data file")->required();
    fit_cmd->add_option("--model", fit.model, "scaling or fringe")->check(CLI::IsMember({"scaling", "fringe"}));
    fit_cmd->add_option("--config", fit_config, "Config supplying delta_f * delta_t");
    fit_cmd->add_option("--dfdt", fit.dfdt, "Time-bandwidth product for scaling fits");
    fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory");

    CarCurveArgs cc;
    std::string cc_config;
    auto* curve = app.add_subcommand("car-curve", "Analytic and Monte Carlo CAR versus mu");
    curve->add_option("--config", cc_config, "Experiment config JSON");
    curve->add_option("--mu", cc.mu_values, "Mean photon numbers per pulse (ascending)")->required()->delimiter(',');
    curve->add_option("--pulses", cc.pulses, "Run length M per point");
    curve->add_option("--seed", cc.seed, "RNG seed");
    curve->add_option("--pulse-unit", cc.pulse_unit, "start_events or pump_pulses");
    curve->add_option("--threads", cc.threads, "Worker threads (0: OpenMP default)");
    curve->add_option("--out-dir", cc.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    auto opt_path = [](const std::string& s) {
        return s.empty() ? std::optional<std::filesystem::path>{} : std::filesystem::path(s);
    };

    if (*analytic) {
        an.config = opt_path(an_config);
        if (analytic->count("--to") == 0) an.to = an.from;
        return cmd_analytic(an, args, std::cerr);
    }
    if (*mc_car) {
        car.config = opt_path(car_config);
        return cmd_mc_car(car, args, std::cerr);
    }
    if (*mc_fringe) {
        fr.config = opt_path(fr_config);
        return cmd_mc_fringe(fr, args, std::cerr);
    }
    if (*fit_cmd) {
        fit.config = opt_path(fit_config);
        return cmd_fit(fit, args, std::cerr);
    }
    cc.config = opt_path(cc_config);
    return cmd_car_curve(cc, args, std::cerr);
}

}  // namespace tbsim
