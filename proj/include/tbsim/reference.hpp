#pragma once

#include "tbsim/montecarlo.hpp"

namespace tbsim {

// Literal pulse-by-pulse simulators: draw every photon, thin it through the
// channel, place it in a slot, then histogram by brute force. Serial, slow,
// pump_pulses runs only. They share no sampling or histogram code with the
// event-driven kernels and exist to cross-check them statistically.

CoincidenceHistogram simulate_car_run_reference(const ExperimentConfig& cfg);

FringeRun simulate_fringe_run_reference(const ExperimentConfig& cfg, PhasePair phases);

}  // namespace tbsim
