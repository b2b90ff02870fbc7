#pragma once

// Physical constants, exact SI (2019 redefinition) values.
namespace nvstimex::constants {

inline constexpr double planck_j_s = 6.62607015e-34;
inline constexpr double light_speed_m_s = 299792458.0;
inline constexpr double elementary_charge_c = 1.602176634e-19;
inline constexpr double hbar_j_s = 1.054571817e-34;

// hc in J*m, used for photon energies.
inline constexpr double hc_j_m = planck_j_s * light_speed_m_s;

}  // namespace nvstimex::constants
