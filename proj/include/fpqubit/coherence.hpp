#pragma once

// Dephasing and relaxation models: clock-transition Hahn-echo dephasing,
// filter-function coherence under CPMG decoupling from a power-law noise
// spectrum, and the direct + Raman spin-lattice relaxation law.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fpq {

/// S(omega) = amplitude * omega^-gamma_psd on angular frequency, with
/// optional hard cutoffs (rad/s) outside of which S vanishes.
struct NoisePsd {
  double amplitude = 0.0;
  double gamma_psd = 0.0;
  std::optional<double> low_cutoff;
  std::optional<double> high_cutoff;

  void validate() const;
  double operator()(double omega) const;
};

/// N pi pulses at the Carr-Purcell positions t_k = T (2k - 1) / (2N).
/// N = 0 is free evolution.
struct CpmgSpec {
  std::size_t n_pulses = 1;
  double total_time = 0.0;  // s

  void validate() const;
  std::vector<double> pulse_times() const;
};

struct ClockModel {
  double e = 0.0;              // Hz
  double baseline_rate = 0.0;  // 1/s
  double slope_c = 0.0;        // rate per unit gamma_eff

  void validate() const;
};

/// gamma_el b_z / sqrt((e / gamma_el)^2 + b_z^2), Hz/T.
double clock_gamma_eff(double b_z, double e);

/// baseline_rate + slope_c * clock_gamma_eff(b_z, e), 1/s.
double hahn_rate_vs_field(double b_z, const ClockModel& model);

/// Two-parameter least-squares fit of (baseline_rate, slope_c) to measured
/// Hahn-echo T2 values.
ClockModel fit_clock_model(std::span<const double> b_z, std::span<const double> t2, double e);

/// F(omega) = |y(omega)|^2 omega^2 / 2 for the +-1 toggling function of the
/// sequence.
double filter_function(const CpmgSpec& spec, double omega);

struct QuadratureOptions {
  double points_per_decade = 2000.0;
  // Largest step in x = omega * T; keeps the filter passband resolved.
  double max_step_x = 0.39269908169872414;  // 2 pi / 16
  double low_factor = 1e-3;   // default lower cutoff, in units of 1/T
  double high_factor = 1e3;   // default upper cutoff, in units of max(N, 1)/T
};

/// chi = (1/pi) int S(omega) F(omega) / omega^2 d omega.
double cpmg_chi(const NoisePsd& psd, const CpmgSpec& spec, const QuadratureOptions& q = {});

/// exp(-chi).
double cpmg_coherence(const NoisePsd& psd, const CpmgSpec& spec, const QuadratureOptions& q = {});

/// Total time at which chi = 1, by bracketed bisection (relative tolerance 1e-6).
double solve_t2(const NoisePsd& psd, std::size_t n_pulses, const QuadratureOptions& q = {});

/// gamma = e / (1 - e) for a decoupling scaling T2 ~ N^e.
double psd_exponent_from_scaling(double e_scaling);

/// relax_a T + relax_raman T^7, 1/s.
double t1_rate(double temp, double relax_a, double relax_raman);

}  // namespace fpq
