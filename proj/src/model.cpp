#include "tbsim/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tbsim {

double PhasePair::reduced(double phi)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

double effective_alpha(const ChannelParams& ch, bool include_interferometer)
{
    double loss_db = ch.out_coupling_db + ch.channel_loss_db;
    if (include_interferometer) loss_db += ch.interferometer_loss_db;
    return std::pow(10.0, -loss_db / 10.0) * ch.detector_efficiency;
}

double dark_per_slot(const ChannelParams& ch, double rep_rate_ghz)
{
    if (!(rep_rate_ghz > 0.0)) throw std::invalid_argument("rep_rate must be positive");
    return ch.dark_rate_hz / (rep_rate_ghz * 1e9);
}

ExperimentConfig default_config()
{
    ExperimentConfig cfg;
    cfg.source.a = 5.78;
    cfg.source.b = 1.03;
    cfg.source.delta_f = 12.5;
    cfg.source.delta_t = 0.060;
    cfg.source.rep_rate = 1.0;
    // root of a p^2 x + b p x = 0.004 with x = 0.75
    cfg.source.peak_power = 5.035692195258068e-3;

    cfg.signal.out_coupling_db = 9.0;
    cfg.signal.channel_loss_db = 6.0;
    cfg.signal.detector_efficiency = 0.2;
    cfg.signal.dark_rate_hz = 50.0;
    cfg.signal.interferometer_loss_db = 0.0;
    cfg.signal.wavelength_nm = 1544.6;

    cfg.idler.out_coupling_db = 9.0;
    cfg.idler.channel_loss_db = 6.7;
    cfg.idler.detector_efficiency = 0.2;
    cfg.idler.dark_rate_hz = 10.0;
    cfg.idler.interferometer_loss_db = 0.0;
    cfg.idler.wavelength_nm = 1546.2;

    cfg.coherence_slots = 1000;
    cfg.num_pulses = 10'000'000;
    cfg.pulse_count_unit = PulseCountUnit::start_events;
    cfg.phases = {};
    cfg.seed = 1;
    cfg.interferometers_present = false;
    return cfg;
}

namespace {

void check_channel(const ChannelParams& ch, const std::string& prefix,
                   std::vector<Violation>& out)
{
    auto non_negative = [&](double v, const char* name) {
        if (!(v >= 0.0)) out.push_back({prefix + name, std::string(name) + " < 0"});
    };
    non_negative(ch.out_coupling_db, "out_coupling_db");
    non_negative(ch.channel_loss_db, "channel_loss_db");
    non_negative(ch.interferometer_loss_db, "interferometer_loss_db");
    if (!(ch.detector_efficiency >= 0.0 && ch.detector_efficiency <= 1.0))
        out.push_back({prefix + "detector_efficiency", "detector_efficiency out of [0,1]"});
    non_negative(ch.dark_rate_hz, "dark_rate_hz");
}

}  // namespace

std::vector<Violation> validate(const ExperimentConfig& cfg)
{
    std::vector<Violation> out;
    const auto& s = cfg.source;
    if (!(s.a > 0.0)) out.push_back({"source.a", "a <= 0"});
    if (!(s.b >= 0.0)) out.push_back({"source.b", "b < 0"});
    if (!(s.delta_f > 0.0)) out.push_back({"source.delta_f", "delta_f <= 0"});
    if (!(s.delta_t > 0.0)) out.push_back({"source.delta_t", "delta_t <= 0"});
    if (!(s.rep_rate > 0.0)) out.push_back({"source.rep_rate", "rep_rate <= 0"});
    if (!(s.peak_power >= 0.0)) out.push_back({"source.peak_power", "peak_power < 0"});
    check_channel(cfg.signal, "signal.", out);
    check_channel(cfg.idler, "idler.", out);
    if (cfg.coherence_slots < 2) out.push_back({"coherence_slots", "coherence_slots < 2"});
    if (cfg.num_pulses < 1) out.push_back({"num_pulses", "num_pulses < 1"});
    if (!std::isfinite(cfg.phases.phi_s)) out.push_back({"phases.phi_s", "phi_s not finite"});
    if (!std::isfinite(cfg.phases.phi_i)) out.push_back({"phases.phi_i", "phi_i not finite"});
    return out;
}

std::string to_string(PulseCountUnit unit)
{
    return unit == PulseCountUnit::start_events ? "start_events" : "pump_pulses";
}

PulseCountUnit pulse_count_unit_from_string(const std::string& s)
{
    if (s == "start_events") return PulseCountUnit::start_events;
    if (s == "pump_pulses") return PulseCountUnit::pump_pulses;
    throw std::invalid_argument("unknown pulse_count_unit '" + s + "'");
}

}  // namespace tbsim
