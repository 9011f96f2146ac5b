#include "tbsim/reference.hpp"

#include <algorithm>
#include <random>

#include "tbsim/analytic.hpp"
#include "tbsim/timebin.hpp"

namespace tbsim {

namespace {

struct SlotCounts {
    std::vector<std::uint32_t> s;
    std::vector<std::uint32_t> i;

    explicit SlotCounts(std::uint64_t m) : s(m, 0), i(m, 0) {}

    void hit(std::uint64_t slot, bool signal)
    {
        if (slot >= s.size()) return;
        ++(signal ? s : i)[slot];
    }
};

CoincidenceHistogram histogram_of(const SlotCounts& c)
{
    CoincidenceHistogram h;
    const auto m = static_cast<std::int64_t>(c.s.size());
    for (int d = -h.half_width; d <= h.half_width; ++d) {
        const auto idx = static_cast<std::size_t>(d + h.half_width);
        for (std::int64_t t = 0; t < m; ++t) {
            const std::int64_t u = t + d;
            if (u < 0 || u >= m) continue;
            const auto ss = c.s[static_cast<std::size_t>(t)];
            const auto ii = c.i[static_cast<std::size_t>(u)];
            if (ss && ii) {
                ++h.counts[idx];
                h.multi_hit_counts[idx] += std::uint64_t{ss} * ii;
            }
        }
    }
    h.num_pulses = c.s.size();
    h.start_events = static_cast<std::uint64_t>(
        std::count_if(c.s.begin(), c.s.end(), [](std::uint32_t v) { return v > 0; }));
    return h;
}

void require_pump_pulses(const ExperimentConfig& cfg)
{
    if (cfg.pulse_count_unit != PulseCountUnit::pump_pulses)
        throw std::invalid_argument("reference simulator runs pump_pulses only");
}

}  // namespace

CoincidenceHistogram simulate_car_run_reference(const ExperimentConfig& cfg)
{
    require_pump_pulses(cfg);
    const PairStatistics st = pair_statistics(cfg.source.peak_power, cfg.source);
    const double as = effective_alpha(cfg.signal, false);
    const double ai = effective_alpha(cfg.idler, false);
    const double ds = dark_per_slot(cfg.signal, cfg.source.rep_rate);
    const double di = dark_per_slot(cfg.idler, cfg.source.rep_rate);

    std::mt19937_64 gen(cfg.seed);
    std::poisson_distribution<int> pairs(st.mu_c), noise_s(st.mu_n_s), noise_i(st.mu_n_i);
    std::bernoulli_distribution keep_s(as), keep_i(ai), dark_s(ds), dark_i(di);

    SlotCounts c(cfg.num_pulses);
    for (std::uint64_t t = 0; t < cfg.num_pulses; ++t) {
        for (int k = pairs(gen); k > 0; --k) {
            if (keep_s(gen)) c.hit(t, true);
            if (keep_i(gen)) c.hit(t, false);
        }
        for (int k = noise_s(gen); k > 0; --k)
            if (keep_s(gen)) c.hit(t, true);
        for (int k = noise_i(gen); k > 0; --k)
            if (keep_i(gen)) c.hit(t, false);
        if (dark_s(gen)) c.hit(t, true);
        if (dark_i(gen)) c.hit(t, false);
    }
    return histogram_of(c);
}

FringeRun simulate_fringe_run_reference(const ExperimentConfig& cfg, PhasePair phases)
{
    require_pump_pulses(cfg);
    const PairStatistics st = pair_statistics(cfg.source.peak_power, cfg.source);
    if (st.mu_c >= 0.1) throw std::invalid_argument("fringe run needs mu_c < 0.1");
    const double as = effective_alpha(cfg.signal, true);
    const double ai = effective_alpha(cfg.idler, true);
    const double ds = dark_per_slot(cfg.signal, cfg.source.rep_rate);
    const double di = dark_per_slot(cfg.idler, cfg.source.rep_rate);

    // Joint (signal slot, idler slot) distribution of one pair, both photons in
    // the detected ports, followed by the three port-loss classes.
    auto state = entangled_state(cfg.coherence_slots);
    state = apply_mzi_serial(state, Mode::signal, phases.phi_s);
    state = apply_mzi_serial(state, Mode::idler, phases.phi_i);
    const std::size_t rows = state.signal_dim(), cols = state.idler_dim();
    std::vector<double> cells;
    cells.reserve(rows * cols + 3);
    for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t k = 0; k < cols; ++k) cells.push_back(std::norm(state.amplitude(j, k)));
    const double both = state.norm_squared();
    cells.push_back(0.5 - both);  // signal detected port only
    cells.push_back(0.5 - both);  // idler detected port only
    cells.push_back(both);        // neither
    std::discrete_distribution<std::size_t> pair_cell(cells.begin(), cells.end());
    const std::size_t grid = rows * cols;

    std::mt19937_64 gen(cfg.seed);
    std::bernoulli_distribution emit(st.mu_c), keep_s(as), keep_i(ai), half(0.5), dark_s(ds), dark_i(di);
    std::poisson_distribution<int> noise_s(st.mu_n_s), noise_i(st.mu_n_i);

    SlotCounts c(cfg.num_pulses);
    for (std::uint64_t t = 0; t < cfg.num_pulses; ++t) {
        if (emit(gen)) {
            const std::size_t cell = pair_cell(gen);
            if (cell < grid) {
                const auto j = static_cast<std::int64_t>(cell / cols);
                const auto k = static_cast<std::int64_t>(cell % cols);
                std::uint64_t s_slot = t, i_slot = t;
                if (j == k) {
                    s_slot = i_slot = t + (half(gen) ? 1 : 0);
                } else if (k > j) {
                    i_slot = t + static_cast<std::uint64_t>(k - j);
                } else {
                    s_slot = t + static_cast<std::uint64_t>(j - k);
                }
                if (keep_s(gen)) c.hit(s_slot, true);
                if (keep_i(gen)) c.hit(i_slot, false);
            } else if (cell == grid) {
                if (keep_s(gen)) c.hit(t + (half(gen) ? 1 : 0), true);
            } else if (cell == grid + 1) {
                if (keep_i(gen)) c.hit(t + (half(gen) ? 1 : 0), false);
            }
        }
        for (int k = noise_s(gen); k > 0; --k)
            if (half(gen) && keep_s(gen)) c.hit(t + (half(gen) ? 1 : 0), true);
        for (int k = noise_i(gen); k > 0; --k)
            if (half(gen) && keep_i(gen)) c.hit(t + (half(gen) ? 1 : 0), false);
        if (dark_s(gen)) c.hit(t, true);
        if (dark_i(gen)) c.hit(t, false);
    }
    FringeRun run;
    run.histogram = histogram_of(c);
    run.coincidences = run.histogram.at(0);
    return run;
}

}  // namespace tbsim
