#pragma once

namespace fpq::constants {

// Every frequency in this library is an ordinary frequency in Hz.
inline constexpr double gamma_el = 28.024e9;         // Hz/T
inline constexpr double mu0_over_4pi = 1e-7;         // T m/A
inline constexpr double proton_moment = 1.4106e-26;  // J/T
inline constexpr double avogadro = 6.02214076e23;    // 1/mol
inline constexpr double pi = 3.14159265358979323846;

}  // namespace fpq::constants
