#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tbsim/model.hpp"

namespace tbsim {

enum class Mode { signal, idler };

/// Two-photon amplitudes over (signal slot, idler slot) for a single pair
/// spread coherently across n pump slots. Indices are 0-based: slot k of the
/// physical picture is index k-1. Each mode grows by one slot when its
/// 1-bit-delay interferometer is applied.
class TimeBinState {
public:
    std::int64_t n_slots() const { return n_; }
    std::size_t signal_dim() const { return rows_; }
    std::size_t idler_dim() const { return cols_; }

    std::complex<double> amplitude(std::size_t signal_idx, std::size_t idler_idx) const
    {
        return amp_[signal_idx * cols_ + idler_idx];
    }

    double norm_squared() const;
    /// Probability weight removed by the unused interferometer ports.
    double loss_weight() const { return loss_; }
    bool normalized() const { return true; }
    bool mzi_applied(Mode m) const { return m == Mode::signal ? mzi_s_ : mzi_i_; }

private:
    friend TimeBinState entangled_state(std::int64_t n);
    friend TimeBinState apply_mzi(const TimeBinState& state, Mode mode, double phi);
    friend TimeBinState apply_mzi_serial(const TimeBinState& state, Mode mode, double phi);

    std::int64_t n_ = 0;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::complex<double>> amp_;
    double loss_ = 0.0;
    bool mzi_s_ = false;
    bool mzi_i_ = false;
};

/// Uniform superposition sum_k |k>_s |k>_i / sqrt(n).
TimeBinState entangled_state(std::int64_t n);

/// |k> -> (|k> + e^{i phi} |k+1>) / 2 on one mode. The other output port is
/// not modeled; its share of the probability goes into loss_weight().
/// Throws std::logic_error if this mode already passed an interferometer.
TimeBinState apply_mzi(const TimeBinState& state, Mode mode, double phi);

/// Single-threaded version of apply_mzi; same arithmetic, kept for testing.
TimeBinState apply_mzi_serial(const TimeBinState& state, Mode mode, double phi);

/// sum_j |amp(j, j)|^2 once both interferometers are in place.
double matched_coincidence_probability(const TimeBinState& state);

double fringe(std::int64_t n, PhasePair phases);

/// (n-1)/n: boundary slots carry no interference term.
double ideal_visibility(std::int64_t n);

/// Detected-port outcome classes for one emitted pair after both
/// interferometers. matched + unmatched is the both-detected-port weight t;
/// the marginal of each mode is 1/2, so signal_only = idler_only = 1/2 - t
/// and neither = t.
struct PairPortOutcomes {
    double matched = 0.0;
    double unmatched = 0.0;
    double signal_only = 0.0;
    double idler_only = 0.0;
    double neither = 0.0;
};

PairPortOutcomes pair_port_outcomes(std::int64_t n, PhasePair phases);

}  // namespace tbsim
