#pragma once

namespace bbpc {

// CODATA 2018 exact values (SI).
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

inline constexpr double kPi = 3.14159265358979323846;

} // namespace bbpc
