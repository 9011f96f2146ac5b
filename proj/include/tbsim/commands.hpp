#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tbsim {

// Every command writes its files plus manifest.json into out_dir, returns 0
// iff all outputs were produced, and reports problems on `err`.

struct AnalyticArgs {
    std::optional<std::filesystem::path> config;
    std::string sweep = "mu";  // mu | power | dfdt
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    bool log_spacing = false;
    std::optional<double> mu;  // fixed mu for dfdt sweeps
    std::filesystem::path out_dir = "out";
};

struct McCarArgs {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> pulses;
    std::optional<std::uint64_t> seed;
    std::optional<double> mu;
    std::optional<std::string> pulse_unit;
    int threads = 0;
    std::filesystem::path out_dir = "out";
};

struct McFringeArgs {
    std::optional<std::filesystem::path> config;
    std::string phi_i = "0";
    int steps = 16;
    std::optional<std::uint64_t> pulses;
    std::optional<std::uint64_t> seed;
    std::optional<double> mu;
    std::optional<std::string> pulse_unit;
    int threads = 0;
    std::filesystem::path out_dir = "out";
};

struct FitArgs {
    std::filesystem::path data;
    std::string model = "fringe";  // fringe | scaling
    std::optional<std::filesystem::path> config;
    std::optional<double> dfdt;
    std::filesystem::path out_dir = "out";
};

struct CarCurveArgs {
    std::optional<std::filesystem::path> config;
    std::vector<double> mu_values;
    std::optional<std::uint64_t> pulses;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> pulse_unit;
    int threads = 0;
    std::filesystem::path out_dir = "out";
};

int cmd_analytic(const AnalyticArgs& args, const std::vector<std::string>& argv, std::ostream& err);
int cmd_mc_car(const McCarArgs& args, const std::vector<std::string>& argv, std::ostream& err);
int cmd_mc_fringe(const McFringeArgs& args, const std::vector<std::string>& argv, std::ostream& err);
int cmd_fit(const FitArgs& args, const std::vector<std::string>& argv, std::ostream& err);
int cmd_car_curve(const CarCurveArgs& args, const std::vector<std::string>& argv, std::ostream& err);

/// Parses argv and dispatches to the commands above.
int run_cli(int argc, char** argv);

}  // namespace tbsim
