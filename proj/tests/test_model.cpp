#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tbsim/model.hpp"

using namespace tbsim;

namespace {

ChannelParams channel(double out_db, double ch_db, double eff)
{
    ChannelParams c;
    c.out_coupling_db = out_db;
    c.channel_loss_db = ch_db;
    c.detector_efficiency = eff;
    return c;
}

bool has_message(const std::vector<Violation>& v, const std::string& msg)
{
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.message == msg; });
}

}  // namespace

TEST_CASE("effective_alpha at the setup losses")
{
    // 10^(-15/10) * 0.2 and 10^(-15.7/10) * 0.2
    CHECK(effective_alpha(channel(9.0, 6.0, 0.2), false) == doctest::Approx(6.324555320336759e-3).epsilon(1e-12));
    CHECK(effective_alpha(channel(9.0, 6.7, 0.2), false) == doctest::Approx(5.383069607853834e-3).epsilon(1e-12));
    CHECK(effective_alpha(channel(0.0, 0.0, 1.0), false) == 1.0);
}

TEST_CASE("effective_alpha includes interferometer loss only when asked")
{
    auto c = channel(1.0, 2.0, 0.5);
    c.interferometer_loss_db = 3.0;
    CHECK(effective_alpha(c, true) == doctest::Approx(effective_alpha(c, false) * std::pow(10.0, -0.3)));
}

TEST_CASE("effective_alpha is decreasing in each loss and linear in efficiency")
{
    const auto base = channel(3.0, 4.0, 0.4);
    for (double step : {0.1, 1.0, 5.0}) {
        auto c = base;
        c.out_coupling_db += step;
        CHECK(effective_alpha(c, false) < effective_alpha(base, false));
        c = base;
        c.channel_loss_db += step;
        CHECK(effective_alpha(c, false) < effective_alpha(base, false));
        c = base;
        c.interferometer_loss_db += step;
        CHECK(effective_alpha(c, true) < effective_alpha(base, true));
    }
    auto half = base;
    half.detector_efficiency = 0.2;
    CHECK(effective_alpha(half, false) == doctest::Approx(0.5 * effective_alpha(base, false)).epsilon(1e-15));
}

TEST_CASE("dark_per_slot")
{
    ChannelParams c;
    c.dark_rate_hz = 50.0;
    CHECK(dark_per_slot(c, 1.0) == doctest::Approx(5e-8).epsilon(1e-15));
    c.dark_rate_hz = 10.0;
    CHECK(dark_per_slot(c, 1.0) == doctest::Approx(1e-8).epsilon(1e-15));
    c.dark_rate_hz = 0.0;
    CHECK(dark_per_slot(c, 1.0) == 0.0);
    CHECK_THROWS_AS(dark_per_slot(c, 0.0), std::invalid_argument);
}

TEST_CASE("dark_per_slot round-trips the rate")
{
    for (double rate : {0.0, 1.0, 10.0, 50.0, 1234.5}) {
        for (double rep : {0.1, 1.0, 2.5}) {
            ChannelParams c;
            c.dark_rate_hz = rate;
            CHECK(dark_per_slot(c, rep) * rep * 1e9 == doctest::Approx(rate).epsilon(1e-15));
        }
    }
}

TEST_CASE("default_config operating point")
{
    const auto cfg = default_config();
    CHECK(cfg.source.time_bandwidth() == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(cfg.source.a == 5.78);
    CHECK(cfg.source.b == 1.03);
    CHECK(cfg.source.rep_rate == 1.0);
    CHECK(cfg.coherence_slots == 1000);
    CHECK(cfg.signal.dark_rate_hz == 50.0);
    CHECK(cfg.idler.dark_rate_hz == 10.0);
    CHECK(validate(cfg).empty());
}

TEST_CASE("validate reports each violated field")
{
    auto cfg = default_config();
    cfg.signal.detector_efficiency = 1.5;
    auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message == "detector_efficiency out of [0,1]");
    CHECK(v[0].field == "signal.detector_efficiency");

    cfg = default_config();
    cfg.coherence_slots = 1;
    v = validate(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message == "coherence_slots < 2");

    cfg = default_config();
    cfg.source.a = 0.0;
    cfg.idler.channel_loss_db = -1.0;
    cfg.num_pulses = 0;
    v = validate(cfg);
    CHECK(v.size() == 3);
    CHECK(has_message(v, "a <= 0"));
    CHECK(has_message(v, "channel_loss_db < 0"));
    CHECK(has_message(v, "num_pulses < 1"));
}

TEST_CASE("phase reduction")
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    CHECK(PhasePair::reduced(0.0) == 0.0);
    CHECK(PhasePair::reduced(two_pi) == doctest::Approx(0.0));
    CHECK(PhasePair::reduced(-0.5) == doctest::Approx(two_pi - 0.5));
    CHECK(PhasePair::reduced(7.0) == doctest::Approx(7.0 - two_pi));
    CHECK((PhasePair{1.0, 2.0}.sum()) == 3.0);
}

TEST_CASE("pulse count unit names")
{
    CHECK(pulse_count_unit_from_string(to_string(PulseCountUnit::start_events)) == PulseCountUnit::start_events);
    CHECK(pulse_count_unit_from_string(to_string(PulseCountUnit::pump_pulses)) == PulseCountUnit::pump_pulses);
    CHECK_THROWS_AS(pulse_count_unit_from_string("pulses"), std::invalid_argument);
}
