#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tbsim/model.hpp"

namespace tbsim {

enum class Channel : std::uint8_t { signal = 0, idler = 1 };

/// One detector click in the slotted time base (slot = pump pulse index).
struct DetectionRecord {
    std::uint64_t slot = 0;
    Channel channel = Channel::signal;

    bool operator==(const DetectionRecord&) const = default;
};

/// Half-width of the accidental reference window, in pulse delays.
inline constexpr int kAccidentalHalfWidth = 3;

/// Pump pulses per independently seeded simulation block. Part of the
/// reproducibility key together with the seed.
inline constexpr std::uint64_t kBlockPulses = std::uint64_t{1} << 26;

/// Coincidences versus (idler slot - signal slot) over [-W, W].
/// counts applies non-photon-number-resolving collapse (a slot with several
/// photons in one channel is one click); multi_hit_counts weights each slot
/// pair by the product of photon multiplicities instead.
struct CoincidenceHistogram {
    int half_width = kAccidentalHalfWidth;
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> multi_hit_counts;
    std::vector<int> window_delays;
    std::uint64_t num_pulses = 0;
    std::uint64_t start_events = 0;

    explicit CoincidenceHistogram(int w = kAccidentalHalfWidth);

    std::uint64_t at(int delay) const { return counts.at(static_cast<std::size_t>(delay + half_width)); }
    std::uint64_t multi_hit_at(int delay) const
    {
        return multi_hit_counts.at(static_cast<std::size_t>(delay + half_width));
    }

    bool operator==(const CoincidenceHistogram&) const = default;
};

struct CarEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

class InsufficientStatistics : public std::runtime_error {
public:
    InsufficientStatistics() : std::runtime_error("insufficient statistics") {}
};

/// counts(0) / mean accidental count, with Poisson error propagation.
CarEstimate estimate_car(const CoincidenceHistogram& hist);

struct RunOptions {
    int threads = 0;  // 0: OpenMP default
};

/// CAR measurement without interferometers: Poisson pairs and noise,
/// per-channel loss, dark counts, non-resolving detectors.
CoincidenceHistogram simulate_car_run(const ExperimentConfig& cfg, const RunOptions& opt = {});

struct FringeRun {
    std::uint64_t coincidences = 0;  // delay-0 clicks
    CoincidenceHistogram histogram;
};

/// Two-photon interference run with both interferometers at `phases`. Pair
/// outcomes are drawn from the exact time-bin amplitudes; noise and darks are
/// phase insensitive.
FringeRun simulate_fringe_run(const ExperimentConfig& cfg, PhasePair phases,
                              const RunOptions& opt = {});

// --- kernel layer -------------------------------------------------------

struct Emission {
    Channel channel = Channel::signal;
    std::uint8_t offset = 0;  // slot offset from the emitting pulse
};

struct Outcome {
    std::uint8_t size = 0;
    std::array<Emission, 2> hits{};
};

struct WeightedOutcome {
    double probability = 0.0;
    Outcome outcome;
};

/// Independent per-pulse event sources. A Poisson source emits N ~ Poisson(mean)
/// events, a Bernoulli source at most one; each event independently yields
/// one detected outcome with the listed probabilities (the remainder is
/// undetected). Sources are stored already thinned to detected events.
class PulseModel {
public:
    void add_poisson(double mean, const std::vector<WeightedOutcome>& outcomes);
    void add_bernoulli(double probability, const std::vector<WeightedOutcome>& outcomes);

    /// Probability that a pulse produces at least one detection.
    double active_probability() const { return p_active_; }
    /// Probability that a pulse produces at least one detection in `ch`.
    double click_probability(Channel ch) const;

    /// Pulses [begin, end) of block `block`, sorted by slot. Only pulses with
    /// at least one detection are visited.
    std::vector<DetectionRecord> generate_block(std::uint64_t seed, std::uint64_t block,
                                                std::uint64_t begin, std::uint64_t end) const;

private:
    struct Source {
        bool poisson = true;
        double rate = 0.0;   // detected-event mean or probability
        double log_q = 0.0;  // log P(no detected event)
        double cond = 0.0;   // P(nonzero | none before, some from here on)
        std::vector<double> cumulative;
        std::vector<Outcome> outcomes;
    };

    void add(bool poisson, double rate, const std::vector<WeightedOutcome>& outcomes);
    void refresh();
    template <class R>
    void sample_active(R& rng, std::uint64_t slot, std::vector<DetectionRecord>& out) const;

    std::vector<Source> sources_;
    double p_active_ = 0.0;
};

PulseModel car_pulse_model(const ExperimentConfig& cfg);
PulseModel fringe_pulse_model(const ExperimentConfig& cfg, PhasePair phases);

/// Runs a pulse model until `count` pump pulses or signal clicks, depending
/// on `unit`, and histograms the clicks. Result is independent of the thread
/// count.
CoincidenceHistogram run_pulse_model(const PulseModel& model, std::uint64_t count,
                                     PulseCountUnit unit, std::uint64_t seed,
                                     const RunOptions& opt = {});

/// Streams slot-ordered detections into a coincidence histogram.
class CoincidenceAccumulator {
public:
    /// start_limit > 0 stops the run W slots after the start_limit-th signal click.
    explicit CoincidenceAccumulator(std::uint64_t start_limit = 0, int half_width = kAccidentalHalfWidth);

    void push(const DetectionRecord& d);
    /// Declares that every detection with slot < `slot` has been pushed.
    void advance_to(std::uint64_t slot);
    bool done() const { return done_; }
    /// total_pulses is used when the run did not stop on start events.
    CoincidenceHistogram finish(std::uint64_t total_pulses);

private:
    struct SlotHits {
        std::uint64_t slot = 0;
        std::uint32_t s = 0;
        std::uint32_t i = 0;
    };
    void close_current();

    CoincidenceHistogram hist_;
    std::vector<SlotHits> recent_;
    SlotHits current_{};
    bool has_current_ = false;
    std::uint64_t start_limit_;
    std::uint64_t stop_slot_ = 0;
    bool stopping_ = false;
    bool done_ = false;
};

}  // namespace tbsim
