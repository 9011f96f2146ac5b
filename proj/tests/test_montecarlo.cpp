#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tbsim/analytic.hpp"
#include "tbsim/montecarlo.hpp"
#include "tbsim/reference.hpp"
#include "tbsim/rng.hpp"
#include "tbsim/timebin.hpp"

using namespace tbsim;

namespace {

constexpr double pi = std::numbers::pi;

void set_alpha(ChannelParams& ch, double alpha)
{
    ch.out_coupling_db = 0.0;
    ch.channel_loss_db = 0.0;
    ch.interferometer_loss_db = 0.0;
    ch.detector_efficiency = alpha;
    ch.dark_rate_hz = 0.0;
}

// Dark-free setup with the given end-to-end efficiencies at mean photon number mu.
ExperimentConfig ideal_config(double mu, double alpha_s = 1.0, double alpha_i = 1.0)
{
    auto cfg = default_config();
    set_alpha(cfg.signal, alpha_s);
    set_alpha(cfg.idler, alpha_i);
    cfg.source.peak_power = pump_power_for_mu(mu, cfg.source);
    cfg.pulse_count_unit = PulseCountUnit::pump_pulses;
    return cfg;
}

// Distance between two independent Poisson counts in units of their joint sigma.
double poisson_sigmas(double a, double b) { return std::abs(a - b) / std::sqrt(std::max(a + b, 1.0)); }

DetectionRecord sig(std::uint64_t slot) { return {slot, Channel::signal}; }
DetectionRecord idl(std::uint64_t slot) { return {slot, Channel::idler}; }

}  // namespace

TEST_CASE("accumulator histograms idler minus signal delay")
{
    CoincidenceAccumulator acc;
    acc.push(sig(10));
    acc.push(idl(10));
    acc.push(idl(12));
    acc.push(idl(20));
    acc.push(sig(21));
    acc.advance_to(100);
    const auto h = acc.finish(100);
    CHECK(h.at(0) == 1);
    CHECK(h.at(2) == 1);
    CHECK(h.at(-1) == 1);
    CHECK(h.at(1) == 0);
    CHECK(h.at(3) == 0);
    CHECK(h.start_events == 2);
    CHECK(h.num_pulses == 100);
    CHECK(h.window_delays == std::vector<int>{-3, -2, -1, 1, 2, 3});
}

TEST_CASE("accumulator collapses multiple photons per slot")
{
    CoincidenceAccumulator acc;
    acc.push(sig(5));
    acc.push(sig(5));
    acc.push(idl(5));
    acc.push(idl(5));
    acc.push(idl(5));
    acc.push(idl(7));
    acc.advance_to(50);
    const auto h = acc.finish(50);
    CHECK(h.at(0) == 1);
    CHECK(h.multi_hit_at(0) == 6);
    CHECK(h.at(2) == 1);
    CHECK(h.multi_hit_at(2) == 2);
    CHECK(h.start_events == 1);
}

TEST_CASE("accumulator stops the window after the last start event")
{
    CoincidenceAccumulator acc(2);
    acc.push(sig(1));
    acc.push(sig(4));
    acc.push(idl(7));  // delay +3 from the second start, still counted
    acc.push(sig(8));  // after the limit
    acc.push(idl(8));
    acc.advance_to(20);
    CHECK(acc.done());
    const auto h = acc.finish(0);
    CHECK(h.start_events == 2);
    CHECK(h.at(3) == 1);
    CHECK(h.at(0) == 0);
}

TEST_CASE("accumulator rejects out-of-order input")
{
    CoincidenceAccumulator acc;
    acc.push(sig(9));
    CHECK_THROWS_AS(acc.push(sig(3)), std::logic_error);
}

TEST_CASE("estimate_car")
{
    CoincidenceHistogram h;
    for (int d : h.window_delays) h.counts[static_cast<std::size_t>(d + h.half_width)] = 100;
    h.counts[static_cast<std::size_t>(h.half_width)] = 870;
    auto e = estimate_car(h);
    CHECK(e.value == doctest::Approx(8.7));
    CHECK(e.std_error == doctest::Approx(8.7 * std::sqrt(1.0 / 870.0 + 1.0 / 600.0)));

    h.counts[static_cast<std::size_t>(h.half_width)] = 100;
    CHECK(estimate_car(h).value == doctest::Approx(1.0));
    h.counts[static_cast<std::size_t>(h.half_width)] = 200;
    CHECK(estimate_car(h).value == doctest::Approx(2.0));

    CoincidenceHistogram empty;
    empty.counts[static_cast<std::size_t>(empty.half_width)] = 12;
    CHECK_THROWS_AS(estimate_car(empty), InsufficientStatistics);
    try {
        estimate_car(empty);
    } catch (const InsufficientStatistics& ex) {
        CHECK(std::string(ex.what()) == "insufficient statistics");
    }
}

TEST_CASE("same seed reproduces the histogram bit for bit")
{
    auto cfg = default_config();
    cfg.num_pulses = 20000;
    const auto a = simulate_car_run(cfg);
    const auto b = simulate_car_run(cfg);
    CHECK(a == b);
    cfg.seed = 2;
    const auto c = simulate_car_run(cfg);
    CHECK_FALSE(a == c);
}

TEST_CASE("thread count does not change results")
{
    // pump-pulse runs spanning several blocks
    auto cfg = ideal_config(2e-4, 0.3, 0.4);
    cfg.num_pulses = 3 * kBlockPulses + 12345;
    const auto one = simulate_car_run(cfg, RunOptions{1});
    const auto four = simulate_car_run(cfg, RunOptions{4});
    CHECK(one == four);
    CHECK(one.num_pulses == cfg.num_pulses);

    // start-event runs
    cfg = default_config();
    cfg.num_pulses = 3000;
    CHECK(simulate_car_run(cfg, RunOptions{1}) == simulate_car_run(cfg, RunOptions{3}));

    cfg.interferometers_present = true;
    cfg.num_pulses = 1500;
    const auto f1 = simulate_fringe_run(cfg, {0.5, 0.0}, RunOptions{1});
    const auto f4 = simulate_fringe_run(cfg, {0.5, 0.0}, RunOptions{4});
    CHECK(f1.coincidences == f4.coincidences);
    CHECK(f1.histogram == f4.histogram);
}

TEST_CASE("start-event runs stop after the requested number of signal clicks")
{
    auto cfg = default_config();
    cfg.num_pulses = 5000;
    const auto h = simulate_car_run(cfg);
    CHECK(h.start_events == 5000);
    // a signal click needs on average about 1/(mu alpha_s) pulses
    const double expected_pulses = 5000.0 / (0.004 * effective_alpha(cfg.signal, false));
    CHECK(std::abs(static_cast<double>(h.num_pulses) / expected_pulses - 1.0) < 0.05);
}

TEST_CASE("pair coincidence rate matches mu_c alpha_s alpha_i")
{
    // no noise photons, no darks
    auto cfg = ideal_config(1e-3, 0.5, 0.8);
    cfg.source.b = 0.0;
    cfg.source.peak_power = pump_power_for_mu(1e-3, cfg.source);
    cfg.num_pulses = 10000000;
    const auto h = simulate_car_run(cfg);
    const double mu_c = mu_correlated(cfg.source.peak_power, cfg.source);
    const double expected = mu_c * 0.5 * 0.8 * static_cast<double>(cfg.num_pulses);
    CHECK(std::abs(static_cast<double>(h.at(0)) - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("multi-pair emission with perfect detection")
{
    // all photons paired, all detected: coincidence probability per pulse is
    // P(N >= 1) and accidentals need pairs in two different pulses
    auto cfg = ideal_config(0.05);
    cfg.source.b = 0.0;
    cfg.source.peak_power = pump_power_for_mu(0.05, cfg.source);
    cfg.num_pulses = 400000;
    const auto h = simulate_car_run(cfg);
    const double p1 = -std::expm1(-0.05);
    const double m = static_cast<double>(cfg.num_pulses);
    CHECK(std::abs(h.at(0) - m * p1) < 3.0 * std::sqrt(m * p1));
    for (int d : h.window_delays) CHECK(std::abs(h.at(d) - m * p1 * p1) < 4.0 * std::sqrt(m * p1 * p1));
    for (std::size_t k = 0; k < h.counts.size(); ++k) CHECK(h.counts[k] <= h.multi_hit_counts[k]);
    CHECK(h.multi_hit_at(0) > h.at(0));
}

TEST_CASE("uncorrelated light gives CAR near one")
{
    auto cfg = ideal_config(0.05);
    cfg.source.a = 1e-12;
    cfg.source.peak_power = pump_power_for_mu(0.05, cfg.source);
    cfg.num_pulses = 1000000;
    const auto e = estimate_car(simulate_car_run(cfg));
    CHECK(std::abs(e.value - 1.0) < 3.0 * e.std_error);
}

TEST_CASE("non-resolving counts never exceed multi-hit counts")
{
    for (double mu : {0.01, 0.2}) {
        auto cfg = ideal_config(mu, 0.7, 0.6);
        cfg.num_pulses = 100000;
        const auto h = simulate_car_run(cfg);
        for (std::size_t k = 0; k < h.counts.size(); ++k) CHECK(h.counts[k] <= h.multi_hit_counts[k]);
    }
}

TEST_CASE("simulated CAR converges to the mean-photon-number formula")
{
    for (int k = 0; k < 10; ++k) {
        const double mu = 1e-4 * std::pow(100.0, k / 9.0);
        auto cfg = ideal_config(mu);
        cfg.pulse_count_unit = PulseCountUnit::start_events;
        cfg.num_pulses = 200000;
        cfg.seed = derive_seed(77, static_cast<std::uint64_t>(k));
        const auto e = estimate_car(simulate_car_run(cfg));
        const auto st = pair_statistics(cfg.source.peak_power, cfg.source);
        const double expected = car_from_means(st, 1.0, 0.0);
        CAPTURE(mu);
        CHECK(std::abs(e.value - expected) < 3.0 * e.std_error);

        // exact Poisson value for non-resolving detectors
        const double q = std::exp(-st.mu);
        const double exact = 1.0 + q * q * std::expm1(st.mu_c) / ((1.0 - q) * (1.0 - q));
        CHECK(std::abs(e.value - exact) < 3.0 * e.std_error);
    }
}

TEST_CASE("dark counts enter the CAR run")
{
    // no light at all apart from darks: CAR is 1 and singles follow the dark probability
    auto cfg = ideal_config(1e-6);
    cfg.source.peak_power = 0.0;
    cfg.signal.dark_rate_hz = 2e6;
    cfg.idler.dark_rate_hz = 3e6;
    cfg.num_pulses = 50000;
    cfg.pulse_count_unit = PulseCountUnit::start_events;
    const auto h = simulate_car_run(cfg);
    const double expected_pulses = 50000.0 / 2e-3;
    CHECK(std::abs(static_cast<double>(h.num_pulses) / expected_pulses - 1.0) < 0.03);
    const auto e = estimate_car(h);
    CHECK(std::abs(e.value - 1.0) < 3.0 * e.std_error);
}

TEST_CASE("run configuration errors")
{
    auto cfg = default_config();
    cfg.interferometers_present = true;
    CHECK_THROWS_AS(simulate_car_run(cfg), std::invalid_argument);
    cfg.interferometers_present = false;
    CHECK_THROWS_AS(simulate_fringe_run(cfg, {}), std::invalid_argument);
    cfg.signal.detector_efficiency = 2.0;
    CHECK_THROWS_AS(simulate_car_run(cfg), std::invalid_argument);

    auto dark = ideal_config(1e-3);
    dark.signal.detector_efficiency = 0.0;
    dark.pulse_count_unit = PulseCountUnit::start_events;
    CHECK_THROWS_AS(simulate_car_run(dark), std::invalid_argument);

    auto bright = ideal_config(0.5);
    bright.interferometers_present = true;
    CHECK(pair_statistics(bright.source.peak_power, bright.source).mu_c >= 0.1);
    CHECK_THROWS_AS(fringe_pulse_model(bright, {}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_fringe_run(bright, {}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_fringe_run_reference(bright, {}), std::invalid_argument);
}

TEST_CASE("noise-free fringe follows the time-bin amplitudes")
{
    auto cfg = ideal_config(1e-3);
    cfg.source.b = 0.0;
    cfg.source.peak_power = pump_power_for_mu(1e-3, cfg.source);
    cfg.coherence_slots = 4;
    cfg.interferometers_present = true;
    cfg.num_pulses = 10000000;
    const double mu_c = mu_correlated(cfg.source.peak_power, cfg.source);
    const double m = static_cast<double>(cfg.num_pulses);

    std::vector<double> counts;
    for (int k = 0; k < 8; ++k) {
        const double theta = 2.0 * pi * k / 8.0;
        cfg.seed = derive_seed(5, static_cast<std::uint64_t>(k));
        const auto run = simulate_fringe_run(cfg, {theta, 0.0});
        const double expected = m * mu_c * fringe(4, {theta, 0.0});
        CAPTURE(theta);
        CHECK(std::abs(run.coincidences - expected) < 3.0 * std::sqrt(expected));
        counts.push_back(static_cast<double>(run.coincidences));
    }
    // opposite phases sum to a constant
    const double total = m * mu_c * (fringe(4, {0.0, 0.0}) + fringe(4, {pi, 0.0}));
    for (int k = 0; k < 4; ++k) {
        const double s = counts[k] + counts[k + 4];
        CHECK(std::abs(s - total) < 3.0 * std::sqrt(total));
    }
}

TEST_CASE("fringe depends on the idler phase through the sum")
{
    auto cfg = default_config();
    cfg.interferometers_present = true;
    cfg.num_pulses = 20000;
    for (double theta : {0.0, 1.0, 2.5}) {
        cfg.seed = 11;
        const auto shifted = simulate_fringe_run(cfg, {theta, pi / 2});
        cfg.seed = 12;
        const auto direct = simulate_fringe_run(cfg, {theta + pi / 2, 0.0});
        CHECK(poisson_sigmas(shifted.coincidences, direct.coincidences) < 3.0);
    }
}

TEST_CASE("event-driven and per-pulse reference simulators agree")
{
    auto cfg = default_config();
    set_alpha(cfg.signal, 0.3);
    set_alpha(cfg.idler, 0.2);
    cfg.signal.dark_rate_hz = 2e6;
    cfg.idler.dark_rate_hz = 1e6;
    cfg.source.peak_power = pump_power_for_mu(0.05, cfg.source);
    cfg.pulse_count_unit = PulseCountUnit::pump_pulses;
    cfg.num_pulses = 2000000;

    const auto fast = simulate_car_run(cfg);
    cfg.seed = 99;
    const auto ref = simulate_car_run_reference(cfg);
    CHECK(ref.num_pulses == fast.num_pulses);
    for (int d = -3; d <= 3; ++d) {
        CAPTURE(d);
        CHECK(poisson_sigmas(fast.at(d), ref.at(d)) < 4.0);
        CHECK(poisson_sigmas(fast.multi_hit_at(d), ref.multi_hit_at(d)) < 4.0);
    }
    CHECK(poisson_sigmas(fast.start_events, ref.start_events) < 4.0);

    cfg.interferometers_present = true;
    cfg.coherence_slots = 6;
    for (double theta : {0.0, pi}) {
        cfg.seed = 3;
        const auto f = simulate_fringe_run(cfg, {theta, 0.0});
        const auto r = simulate_fringe_run_reference(cfg, {theta, 0.0});
        CAPTURE(theta);
        for (int d = -3; d <= 3; ++d) CHECK(poisson_sigmas(f.histogram.at(d), r.histogram.at(d)) < 4.0);
        CHECK(f.coincidences == f.histogram.at(0));
    }
}

TEST_CASE("reference simulator accepts pump pulse counts only")
{
    auto cfg = default_config();
    cfg.pulse_count_unit = PulseCountUnit::start_events;
    CHECK_THROWS_AS(simulate_car_run_reference(cfg), std::invalid_argument);
}

TEST_CASE("pulse model click probabilities")
{
    PulseModel m;
    Outcome s;
    s.size = 1;
    s.hits[0] = {Channel::signal, 0};
    Outcome i;
    i.size = 1;
    i.hits[0] = {Channel::idler, 0};
    m.add_poisson(0.2, {{0.5, s}});
    m.add_bernoulli(0.1, {{1.0, i}});
    CHECK(m.click_probability(Channel::signal) == doctest::Approx(-std::expm1(-0.1)));
    CHECK(m.click_probability(Channel::idler) == doctest::Approx(0.1));
    CHECK(m.active_probability() == doctest::Approx(1.0 - std::exp(-0.1) * 0.9));
    CHECK_THROWS_AS(m.add_bernoulli(1.5, {{1.0, s}}), std::invalid_argument);
    CHECK_THROWS_AS(m.add_poisson(0.1, {{0.7, s}, {0.7, i}}), std::invalid_argument);

    const auto h = run_pulse_model(m, 200000, PulseCountUnit::pump_pulses, 4);
    CHECK(std::abs(h.at(0) - 200000 * 0.1 * -std::expm1(-0.1)) < 4.0 * std::sqrt(200000 * 0.01));
}
