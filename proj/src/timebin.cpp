#include "tbsim/timebin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tbsim {

double TimeBinState::norm_squared() const
{
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
}

TimeBinState entangled_state(std::int64_t n)
{
    if (n < 2) throw std::invalid_argument("entangled_state: n must be >= 2");
    TimeBinState st;
    st.n_ = n;
    st.rows_ = st.cols_ = static_cast<std::size_t>(n);
    st.amp_.assign(st.rows_ * st.cols_, {0.0, 0.0});
    const double c = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < st.rows_; ++k) st.amp_[k * st.cols_ + k] = {c, 0.0};
    return st;
}

namespace {

void check_mzi(const TimeBinState& state, Mode mode)
{
    if (state.mzi_applied(mode))
        throw std::logic_error(mode == Mode::signal
                                   ? "apply_mzi: signal interferometer already applied"
                                   : "apply_mzi: idler interferometer already applied");
}

// Output row r of the signal-mode transform (r in [0, rows]):
//   out(r, k) = (in(r, k) + e^{i phi} in(r-1, k)) / 2
inline void signal_row(const std::vector<std::complex<double>>& in, std::size_t rows,
                       std::size_t cols, std::complex<double> ph,
                       std::vector<std::complex<double>>& out, std::size_t r)
{
    for (std::size_t k = 0; k < cols; ++k) {
        std::complex<double> v{0.0, 0.0};
        if (r < rows) v += in[r * cols + k];
        if (r >= 1) v += ph * in[(r - 1) * cols + k];
        out[r * cols + k] = 0.5 * v;
    }
}

// out(j, c) = (in(j, c) + e^{i phi} in(j, c-1)) / 2, c in [0, cols]
inline void idler_row(const std::vector<std::complex<double>>& in, std::size_t cols,
                      std::complex<double> ph, std::vector<std::complex<double>>& out,
                      std::size_t j)
{
    const std::size_t out_cols = cols + 1;
    for (std::size_t c = 0; c < out_cols; ++c) {
        std::complex<double> v{0.0, 0.0};
        if (c < cols) v += in[j * cols + c];
        if (c >= 1) v += ph * in[j * cols + c - 1];
        out[j * out_cols + c] = 0.5 * v;
    }
}

}  // namespace

TimeBinState apply_mzi(const TimeBinState& state, Mode mode, double phi)
{
    check_mzi(state, mode);
    const std::complex<double> ph = std::polar(1.0, phi);
    TimeBinState out = state;
    const auto rows = static_cast<std::int64_t>(state.rows_);
    if (mode == Mode::signal) {
        out.rows_ = state.rows_ + 1;
        out.amp_.assign(out.rows_ * out.cols_, {0.0, 0.0});
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r <= rows; ++r)
            signal_row(state.amp_, state.rows_, state.cols_, ph, out.amp_,
                       static_cast<std::size_t>(r));
        out.mzi_s_ = true;
    } else {
        out.cols_ = state.cols_ + 1;
        out.amp_.assign(out.rows_ * out.cols_, {0.0, 0.0});
#pragma omp parallel for schedule(static)
        for (std::int64_t j = 0; j < rows; ++j)
            idler_row(state.amp_, state.cols_, ph, out.amp_, static_cast<std::size_t>(j));
        out.mzi_i_ = true;
    }
    out.loss_ = state.loss_ + (state.norm_squared() - out.norm_squared());
    return out;
}

TimeBinState apply_mzi_serial(const TimeBinState& state, Mode mode, double phi)
{
    check_mzi(state, mode);
    const std::complex<double> ph = std::polar(1.0, phi);
    TimeBinState out = state;
    if (mode == Mode::signal) {
        out.rows_ = state.rows_ + 1;
        out.amp_.assign(out.rows_ * out.cols_, {0.0, 0.0});
        for (std::size_t r = 0; r <= state.rows_; ++r)
            signal_row(state.amp_, state.rows_, state.cols_, ph, out.amp_, r);
        out.mzi_s_ = true;
    } else {
        out.cols_ = state.cols_ + 1;
        out.amp_.assign(out.rows_ * out.cols_, {0.0, 0.0});
        for (std::size_t j = 0; j < state.rows_; ++j)
            idler_row(state.amp_, state.cols_, ph, out.amp_, j);
        out.mzi_i_ = true;
    }
    out.loss_ = state.loss_ + (state.norm_squared() - out.norm_squared());
    return out;
}

double matched_coincidence_probability(const TimeBinState& state)
{
    if (!state.mzi_applied(Mode::signal) || !state.mzi_applied(Mode::idler))
        throw std::logic_error("matched_coincidence_probability: both interferometers required");
    double p = 0.0;
    const std::size_t d = std::min(state.signal_dim(), state.idler_dim());
    for (std::size_t j = 0; j < d; ++j) p += std::norm(state.amplitude(j, j));
    return p;
}

namespace {

TimeBinState both_arms(std::int64_t n, PhasePair phases)
{
    auto st = entangled_state(n);
    st = apply_mzi(st, Mode::signal, phases.phi_s);
    return apply_mzi(st, Mode::idler, phases.phi_i);
}

}  // namespace

double fringe(std::int64_t n, PhasePair phases)
{
    return matched_coincidence_probability(both_arms(n, phases));
}

double ideal_visibility(std::int64_t n)
{
    if (n < 2) throw std::invalid_argument("ideal_visibility: n must be >= 2");
    return static_cast<double>(n - 1) / static_cast<double>(n);
}

PairPortOutcomes pair_port_outcomes(std::int64_t n, PhasePair phases)
{
    const auto st = both_arms(n, phases);
    PairPortOutcomes o;
    const double both = st.norm_squared();
    o.matched = matched_coincidence_probability(st);
    o.unmatched = std::max(0.0, both - o.matched);
    o.signal_only = 0.5 - both;
    o.idler_only = 0.5 - both;
    o.neither = both;
    return o;
}

}  // namespace tbsim
