#include "tbsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tbsim/analytic.hpp"
#include "tbsim/rng.hpp"
#include "tbsim/timebin.hpp"

namespace tbsim {

CoincidenceHistogram::CoincidenceHistogram(int w) : half_width(w)
{
    counts.assign(static_cast<std::size_t>(2 * w + 1), 0);
    multi_hit_counts.assign(static_cast<std::size_t>(2 * w + 1), 0);
    for (int d = -w; d <= w; ++d)
        if (d != 0) window_delays.push_back(d);
}

CarEstimate estimate_car(const CoincidenceHistogram& hist)
{
    std::uint64_t accidental = 0;
    for (int d : hist.window_delays) accidental += hist.at(d);
    if (hist.window_delays.empty() || accidental == 0) throw InsufficientStatistics();
    const double mean = static_cast<double>(accidental) / static_cast<double>(hist.window_delays.size());
    const auto c0 = static_cast<double>(hist.at(0));
    CarEstimate est;
    est.value = c0 / mean;
    // zero true counts: quote the one-count scale
    est.std_error = c0 > 0.0 ? est.value * std::sqrt(1.0 / c0 + 1.0 / static_cast<double>(accidental))
                             : 1.0 / mean;
    return est;
}

// --- PulseModel -----------------------------------------------------------

void PulseModel::add(bool poisson, double rate, const std::vector<WeightedOutcome>& outcomes)
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("PulseModel: event rate must be finite and >= 0");
    if (!poisson && rate > 1.0) throw std::invalid_argument("PulseModel: probability > 1");
    double total = 0.0;
    for (const auto& o : outcomes) {
        if (!(o.probability >= 0.0)) throw std::invalid_argument("PulseModel: negative outcome probability");
        total += o.probability;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("PulseModel: outcome probabilities exceed 1");
    total = std::min(total, 1.0);
    const double detected = rate * total;
    if (detected <= 0.0) return;

    Source src;
    src.poisson = poisson;
    src.rate = detected;
    src.log_q = poisson ? -detected : std::log1p(-detected);
    double acc = 0.0;
    for (const auto& o : outcomes) {
        if (o.probability <= 0.0) continue;
        acc += o.probability / total;
        src.cumulative.push_back(acc);
        src.outcomes.push_back(o.outcome);
    }
    src.cumulative.back() = 1.0;
    sources_.push_back(std::move(src));
    refresh();
}

void PulseModel::add_poisson(double mean, const std::vector<WeightedOutcome>& outcomes)
{
    add(true, mean, outcomes);
}

void PulseModel::add_bernoulli(double probability, const std::vector<WeightedOutcome>& outcomes)
{
    add(false, probability, outcomes);
}

void PulseModel::refresh()
{
    double log_z = 0.0;
    for (auto it = sources_.rbegin(); it != sources_.rend(); ++it) {
        log_z += it->log_q;
        const double any_from_here = -std::expm1(log_z);
        it->cond = any_from_here > 0.0 ? -std::expm1(it->log_q) / any_from_here : 0.0;
    }
    p_active_ = -std::expm1(log_z);
}

double PulseModel::click_probability(Channel ch) const
{
    double log_none = 0.0;
    for (const auto& src : sources_) {
        double w = 0.0, prev = 0.0;
        for (std::size_t k = 0; k < src.outcomes.size(); ++k) {
            const double p = src.cumulative[k] - prev;
            prev = src.cumulative[k];
            const auto& o = src.outcomes[k];
            for (std::uint8_t h = 0; h < o.size; ++h)
                if (o.hits[h].channel == ch) {
                    w += p;
                    break;
                }
        }
        log_none += src.poisson ? -src.rate * w : std::log1p(-src.rate * w);
    }
    return -std::expm1(log_none);
}

namespace {

// Poisson(lambda) conditioned on >= 1, by inversion.
template <class R>
std::uint32_t truncated_poisson(double lambda, R& rng)
{
    const double u = rng.uniform();
    double p = lambda / std::expm1(lambda);
    double cdf = p;
    std::uint32_t k = 1;
    while (u > cdf && k < 100000) {
        ++k;
        p *= lambda / k;
        const double next = cdf + p;
        if (next == cdf) break;
        cdf = next;
    }
    return k;
}

}  // namespace

template <class R>
void PulseModel::sample_active(R& rng, std::uint64_t slot, std::vector<DetectionRecord>& out) const
{
    bool forced = true;
    for (const auto& src : sources_) {
        const double threshold = forced ? src.cond : -std::expm1(src.log_q);
        if (!(rng.uniform() < threshold)) continue;
        forced = false;
        const std::uint32_t events = src.poisson ? truncated_poisson(src.rate, rng) : 1u;
        for (std::uint32_t e = 0; e < events; ++e) {
            std::size_t k = 0;
            if (src.outcomes.size() > 1) {
                const double u = rng.uniform();
                while (k + 1 < src.cumulative.size() && u > src.cumulative[k]) ++k;
            }
            const auto& o = src.outcomes[k];
            for (std::uint8_t h = 0; h < o.size; ++h)
                out.push_back({slot + o.hits[h].offset, o.hits[h].channel});
        }
    }
}

std::vector<DetectionRecord> PulseModel::generate_block(std::uint64_t seed, std::uint64_t block,
                                                        std::uint64_t begin, std::uint64_t end) const
{
    std::vector<DetectionRecord> out;
    if (p_active_ <= 0.0 || begin >= end) return out;
    Rng rng(seed, block);
    const double log_q = std::log1p(-p_active_);
    std::uint64_t pos = begin;
    while (true) {
        if (p_active_ < 1.0) {
            // inactive pulses before the next active one ~ Geometric(p_active)
            const double gap = std::floor(std::log(rng.uniform()) / log_q);
            if (!(gap < static_cast<double>(end - pos))) break;
            pos += static_cast<std::uint64_t>(gap);
        } else if (pos >= end) {
            break;
        }
        sample_active(rng, pos, out);
        ++pos;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const DetectionRecord& a, const DetectionRecord& b) { return a.slot < b.slot; });
    return out;
}

// --- CoincidenceAccumulator ----------------------------------------------

CoincidenceAccumulator::CoincidenceAccumulator(std::uint64_t start_limit, int half_width)
    : hist_(half_width), start_limit_(start_limit)
{
}

void CoincidenceAccumulator::push(const DetectionRecord& d)
{
    if (done_) return;
    if (has_current_ && d.slot != current_.slot) {
        if (d.slot < current_.slot)
            throw std::logic_error("CoincidenceAccumulator: detections out of slot order");
        close_current();
        if (done_) return;
    }
    if (!has_current_) {
        current_ = SlotHits{d.slot, 0, 0};
        has_current_ = true;
    }
    if (d.channel == Channel::signal)
        ++current_.s;
    else
        ++current_.i;
}

void CoincidenceAccumulator::advance_to(std::uint64_t slot)
{
    if (done_) return;
    if (has_current_ && current_.slot < slot) close_current();
    if (stopping_ && stop_slot_ < slot) done_ = true;
}

void CoincidenceAccumulator::close_current()
{
    has_current_ = false;
    const SlotHits cur = current_;
    if (stopping_ && cur.slot > stop_slot_) {
        done_ = true;
        return;
    }
    const int w = hist_.half_width;
    const auto idx = [w](int delay) { return static_cast<std::size_t>(delay + w); };

    std::erase_if(recent_, [&](const SlotHits& r) { return cur.slot - r.slot > static_cast<std::uint64_t>(w); });
    if (cur.s && cur.i) {
        ++hist_.counts[idx(0)];
        hist_.multi_hit_counts[idx(0)] += std::uint64_t{cur.s} * cur.i;
    }
    for (const auto& r : recent_) {
        const int dist = static_cast<int>(cur.slot - r.slot);
        if (r.s && cur.i) {
            ++hist_.counts[idx(dist)];
            hist_.multi_hit_counts[idx(dist)] += std::uint64_t{r.s} * cur.i;
        }
        if (r.i && cur.s) {
            ++hist_.counts[idx(-dist)];
            hist_.multi_hit_counts[idx(-dist)] += std::uint64_t{r.i} * cur.s;
        }
    }
    recent_.push_back(cur);

    if (cur.s) {
        ++hist_.start_events;
        if (start_limit_ > 0 && hist_.start_events == start_limit_) {
            stopping_ = true;
            stop_slot_ = cur.slot + static_cast<std::uint64_t>(w);
        }
    }
}

CoincidenceHistogram CoincidenceAccumulator::finish(std::uint64_t total_pulses)
{
    if (!done_ && has_current_) close_current();
    hist_.num_pulses = stopping_ ? stop_slot_ + 1 : total_pulses;
    return hist_;
}

// --- drivers ---------------------------------------------------------------

CoincidenceHistogram run_pulse_model(const PulseModel& model, std::uint64_t count,
                                     PulseCountUnit unit, std::uint64_t seed, const RunOptions& opt)
{
    if (count < 1) throw std::invalid_argument("run length must be >= 1");
    const bool by_starts = unit == PulseCountUnit::start_events;
    constexpr std::uint64_t max_pulses = std::uint64_t{1} << 62;
    std::uint64_t total_pulses = count;
    if (by_starts) {
        const double p_start = model.click_probability(Channel::signal);
        if (!(p_start > 0.0)) throw std::invalid_argument("no signal clicks possible: start events never occur");
        if (static_cast<double>(count) / p_start > 0.25 * static_cast<double>(max_pulses))
            throw std::invalid_argument("start-event target needs too many pump pulses");
        total_pulses = max_pulses;
    }
    const std::uint64_t n_blocks = (total_pulses + kBlockPulses - 1) / kBlockPulses;

    int threads = opt.threads;
#ifdef _OPENMP
    if (threads <= 0) threads = omp_get_max_threads();
#else
    threads = 1;
#endif
    constexpr std::uint64_t wave = 64;

    CoincidenceAccumulator acc(by_starts ? count : 0);
    std::vector<DetectionRecord> carry;
    for (std::uint64_t first = 0; first < n_blocks && !acc.done(); first += wave) {
        const std::uint64_t batch = std::min(wave, n_blocks - first);
        std::vector<std::vector<DetectionRecord>> results(batch);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(batch); ++k) {
            const std::uint64_t b = first + static_cast<std::uint64_t>(k);
            const std::uint64_t begin = b * kBlockPulses;
            const std::uint64_t end = std::min(begin + kBlockPulses, total_pulses);
            results[static_cast<std::size_t>(k)] = model.generate_block(seed, b, begin, end);
        }
        for (std::uint64_t k = 0; k < batch && !acc.done(); ++k) {
            const std::uint64_t block_end = std::min((first + k + 1) * kBlockPulses, total_pulses);
            // carried detections sit at the first slot of this block
            for (const auto& d : carry) acc.push(d);
            carry.clear();
            for (const auto& d : results[k]) {
                if (d.slot < block_end)
                    acc.push(d);
                else
                    carry.push_back(d);
            }
            acc.advance_to(block_end);
        }
    }
    return acc.finish(total_pulses);
}

PulseModel car_pulse_model(const ExperimentConfig& cfg)
{
    const PairStatistics st = pair_statistics(cfg.source.peak_power, cfg.source);
    if (st.mu_c < 0.0 || st.mu_n_s < 0.0 || st.mu_n_i < 0.0)
        throw std::invalid_argument("negative mean photon number");
    const double as = effective_alpha(cfg.signal, false);
    const double ai = effective_alpha(cfg.idler, false);
    const double ds = dark_per_slot(cfg.signal, cfg.source.rep_rate);
    const double di = dark_per_slot(cfg.idler, cfg.source.rep_rate);

    const Outcome s0{1, {Emission{Channel::signal, 0}, {}}};
    const Outcome i0{1, {Emission{Channel::idler, 0}, {}}};
    const Outcome both{2, {Emission{Channel::signal, 0}, Emission{Channel::idler, 0}}};

    PulseModel m;
    m.add_poisson(st.mu_c, {{as * ai, both}, {as * (1.0 - ai), s0}, {(1.0 - as) * ai, i0}});
    m.add_poisson(st.mu_n_s, {{as, s0}});
    m.add_poisson(st.mu_n_i, {{ai, i0}});
    m.add_bernoulli(ds, {{1.0, s0}});
    m.add_bernoulli(di, {{1.0, i0}});
    return m;
}

PulseModel fringe_pulse_model(const ExperimentConfig& cfg, PhasePair phases)
{
    const PairStatistics st = pair_statistics(cfg.source.peak_power, cfg.source);
    if (st.mu_c >= 0.1)
        throw std::invalid_argument("fringe run needs mu_c < 0.1 (single-pair sampling)");
    const double as = effective_alpha(cfg.signal, true);
    const double ai = effective_alpha(cfg.idler, true);
    const double ds = dark_per_slot(cfg.signal, cfg.source.rep_rate);
    const double di = dark_per_slot(cfg.idler, cfg.source.rep_rate);
    const PairPortOutcomes port = pair_port_outcomes(cfg.coherence_slots, phases);

    auto one = [](Channel c, std::uint8_t off) { return Outcome{1, {Emission{c, off}, {}}}; };
    auto two = [](std::uint8_t s_off, std::uint8_t i_off) {
        return Outcome{2, {Emission{Channel::signal, s_off}, Emission{Channel::idler, i_off}}};
    };
    const double both_port = port.matched + port.unmatched;
    const double s_single = both_port * as * (1.0 - ai) + port.signal_only * as;
    const double i_single = both_port * (1.0 - as) * ai + port.idler_only * ai;

    PulseModel m;
    m.add_bernoulli(st.mu_c, {{0.5 * port.matched * as * ai, two(0, 0)},
                              {0.5 * port.matched * as * ai, two(1, 1)},
                              {0.5 * port.unmatched * as * ai, two(0, 1)},
                              {0.5 * port.unmatched * as * ai, two(1, 0)},
                              {0.5 * s_single, one(Channel::signal, 0)},
                              {0.5 * s_single, one(Channel::signal, 1)},
                              {0.5 * i_single, one(Channel::idler, 0)},
                              {0.5 * i_single, one(Channel::idler, 1)}});
    // noise: detected port with probability 1/2, either output slot
    m.add_poisson(st.mu_n_s, {{0.25 * as, one(Channel::signal, 0)}, {0.25 * as, one(Channel::signal, 1)}});
    m.add_poisson(st.mu_n_i, {{0.25 * ai, one(Channel::idler, 0)}, {0.25 * ai, one(Channel::idler, 1)}});
    m.add_bernoulli(ds, {{1.0, one(Channel::signal, 0)}});
    m.add_bernoulli(di, {{1.0, one(Channel::idler, 0)}});
    return m;
}

namespace {

void check_run_config(const ExperimentConfig& cfg)
{
    const auto v = validate(cfg);
    if (!v.empty()) throw std::invalid_argument("invalid config: " + v.front().field + ": " + v.front().message);
}

}  // namespace

CoincidenceHistogram simulate_car_run(const ExperimentConfig& cfg, const RunOptions& opt)
{
    check_run_config(cfg);
    if (cfg.interferometers_present)
        throw std::invalid_argument("CAR run requires interferometers_present = false");
    return run_pulse_model(car_pulse_model(cfg), cfg.num_pulses, cfg.pulse_count_unit, cfg.seed, opt);
}

FringeRun simulate_fringe_run(const ExperimentConfig& cfg, PhasePair phases, const RunOptions& opt)
{
    check_run_config(cfg);
    if (!cfg.interferometers_present)
        throw std::invalid_argument("fringe run requires interferometers_present = true");
    FringeRun run;
    run.histogram = run_pulse_model(fringe_pulse_model(cfg, phases), cfg.num_pulses,
                                    cfg.pulse_count_unit, cfg.seed, opt);
    run.coincidences = run.histogram.at(0);
    return run;
}

}  // namespace tbsim
