#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tbsim {

// Units: power in W, frequency in GHz, time in ns, so delta_f * delta_t is
// dimensionless.
struct SourceParams {
    double a = 5.78;           // SFWM efficiency, 1/W^2 per unit time-bandwidth
    double b = 1.03;           // noise generation, 1/W per unit time-bandwidth
    double delta_f = 12.5;     // filter bandwidth, GHz
    double delta_t = 0.060;    // pump pulse width, ns
    double rep_rate = 1.0;     // GHz
    double peak_power = 0.0;   // coupled peak pump power, W

    double time_bandwidth() const { return delta_f * delta_t; }
};

struct ChannelParams {
    double out_coupling_db = 0.0;
    double channel_loss_db = 0.0;
    double detector_efficiency = 1.0;
    double dark_rate_hz = 0.0;
    double interferometer_loss_db = 0.0;
    double wavelength_nm = 0.0;  // metadata only
};

/// Interferometer phase differences in radians. Arithmetic uses the raw
/// values; reduced() maps into [0, 2pi) for reporting.
struct PhasePair {
    double phi_s = 0.0;
    double phi_i = 0.0;

    double sum() const { return phi_s + phi_i; }
    static double reduced(double phi);
};

enum class PulseCountUnit {
    start_events,  // signal-detector clicks (time-interval-analyzer starts)
    pump_pulses,
};

struct ExperimentConfig {
    SourceParams source;
    ChannelParams signal;
    ChannelParams idler;
    std::int64_t coherence_slots = 1000;
    std::uint64_t num_pulses = 10'000'000;
    PulseCountUnit pulse_count_unit = PulseCountUnit::start_events;
    PhasePair phases;
    std::uint64_t seed = 1;
    bool interferometers_present = false;
};

struct Violation {
    std::string field;
    std::string message;
};

/// End-to-end detection probability of one photon in a channel.
double effective_alpha(const ChannelParams& ch, bool include_interferometer);

/// Dark-count probability per time slot at the given repetition rate (GHz).
double dark_per_slot(const ChannelParams& ch, double rep_rate_ghz);

/// Operating point of the 1.5 um time-bin source: 12.5 GHz filters, 60 ps
/// pulses at 1 GHz, 9 dB out-coupling, 6.0/6.7 dB channel losses, 20%
/// detectors with 50/10 Hz darks, pumped for mu = 0.004 per pulse.
ExperimentConfig default_config();

std::vector<Violation> validate(const ExperimentConfig& cfg);

std::string to_string(PulseCountUnit unit);
PulseCountUnit pulse_count_unit_from_string(const std::string& s);

}  // namespace tbsim
