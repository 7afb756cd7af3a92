#pragma once

// Shot-noise-limited magnetometry estimators and dipole-field arithmetic.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fpqubit/powder.hpp"

namespace fpq {

struct SensorBudget {
  double contrast = 0.0;          // C in (0, 1]
  double photons_per_shot = 0.0;  // detected OADF photons per molecule per sequence
  double t_init = 0.0;            // s
  double t_read = 0.0;            // s
  double t_evolve = 0.0;          // s
  double molecules = 1.0;         // number of molecules
  double overhead = 1.0;          // duty-cycle factor on the shot time

  void validate() const;
  double t_shot() const { return (t_init + t_evolve + t_read) * overhead; }
  double photons() const { return photons_per_shot * molecules; }
};

/// Probe frequencies and the field slope of the normalized two-point
/// difference signal(f_high) - signal(f_low), per unit peak contrast.
struct TwoPointScheme {
  double f_low = 0.0;       // Hz
  double f_high = 0.0;      // Hz
  double slope = 0.0;       // 1/T
  double bias_field = 0.0;  // T
};

/// Forward model: ODMR signal at one field for a list of ascending
/// frequencies.
using FieldSpectrumModel = std::function<std::vector<double>(double field, std::span<const double> freqs)>;

/// Powder forward model on a fixed Fibonacci orientation grid.
FieldSpectrumModel powder_model(const ZfsParams& zfs, double linewidth, std::size_t n_orient,
                                unsigned threads = 1);

struct SlopeResult {
  double slope = 0.0;  // d[signal(f_high) - signal(f_low)]/dB, 1/T
  bool zero = false;   // slope vanishes (symmetric probes or stationary point)
};

/// Central difference of the two-point signal over the field.
SlopeResult two_point_slope(const FieldSpectrumModel& model, double bias_field, double f_low, double f_high,
                            double delta = 10e-6);

/// Scans [f_min, f_max] for the probe pair (one on each side of `f_center`)
/// maximizing |slope|; the slope is normalized by the largest |signal| of
/// the scan at the bias field.
TwoPointScheme choose_two_point_scheme(const FieldSpectrumModel& model, double bias_field, double f_center,
                                       double f_min, double f_max, double f_step, double delta = 10e-6);

struct Sensitivity {
  double eta = 0.0;        // T / sqrt(Hz)
  double eta_molar = 0.0;  // T mol^(1/2) / sqrt(Hz)
};

/// Shot-noise DC sensitivity from Poisson noise on both probe counts.
Sensitivity dc_sensitivity(const SensorBudget& budget, const TwoPointScheme& scheme);

/// Phase-slope shot-noise AC sensitivity; requires t_evolve <= t2.
Sensitivity ac_sensitivity(const SensorBudget& budget, double t2);

/// Point-dipole field magnitude on the dipole axis (axial) or in its
/// equatorial plane.
double dipole_field(double r, double moment, bool axial);

/// Moles of protons per Hz needed to resolve the field of a polarized
/// proton ensemble: (1/p) (eta_molar / field_per_proton)^2.
double proton_number_sensitivity(double eta_molar, double polarization, double field_per_proton);

}  // namespace fpq
