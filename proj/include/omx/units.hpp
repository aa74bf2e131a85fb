#pragma once

#include <numbers>

// Physical constants (CODATA 2018, exact SI where defined) and the single
// cyclic <-> angular conversion boundary. Everything past the boundary is
// angular (rad/s).
namespace omx {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double planck = 6.62607015e-34;    // J s
inline constexpr double boltzmann = 1.380649e-23;   // J/K
inline constexpr double two_pi = 2.0 * std::numbers::pi;
} // namespace constants

constexpr double angular_from_hz(double hz) { return constants::two_pi * hz; }
constexpr double hz_from_angular(double rad_s) { return rad_s / constants::two_pi; }

} // namespace omx
