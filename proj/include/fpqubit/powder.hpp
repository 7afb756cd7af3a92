#pragma once

// Orientation-averaged (powder) ODMR spectra, field-frequency maps and
// ensemble Rabi traces built on the single-molecule spin Hamiltonian.

#include <cstddef>
#include <span>
#include <vector>

#include "fpqubit/spinham.hpp"

namespace fpq {

struct OrientationGrid {
  std::vector<Vector3> points;
  std::size_t count() const { return points.size(); }
};

/// Fibonacci lattice on the unit sphere; deterministic for a given n >= 1.
OrientationGrid fibonacci_sphere(std::size_t n);

/// Uniform ascending frequency grid, Hz.
struct FrequencyGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  /// Grid covering [lo, hi] with the given step (hi included when it lands
  /// on a step within rounding).
  static FrequencyGrid span(double lo, double hi, double step);
  std::vector<double> values() const;
  void validate() const;
};

struct SpectrumGrid {
  std::vector<double> freqs;   // Hz, ascending, uniform
  std::vector<double> signal;  // contrast
  double linewidth = 0.0;      // Gaussian FWHM, Hz
};

struct OdmrMap {
  std::vector<double> b_values;  // T
  std::vector<double> freqs;     // Hz
  std::vector<double> signal;    // row-major, b_values.size() x freqs.size()
  double linewidth = 0.0;

  double at(std::size_t b_index, std::size_t f_index) const {
    return signal[b_index * freqs.size() + f_index];
  }
  std::vector<double> row(std::size_t b_index) const;
};

struct RabiTrace {
  std::vector<double> times;   // s
  std::vector<double> signal;  // in [0, 1]
  double drive_freq = 0.0;     // Hz
  double b1 = 0.0;             // T
};

struct PowderOptions {
  std::size_t n_orient = 10000;
  unsigned threads = 1;
};

/// Powder spectrum on a uniform grid. Each transition is a Gaussian of FWHM
/// `linewidth` whose peak height is (pair amplitude) x (coupling weight); the
/// weight is averaged over two drive axes perpendicular to B0.
SpectrumGrid synth_spectrum(const ZfsParams& zfs, double b_mag, const FrequencyGrid& grid,
                            double linewidth, const PowderOptions& opts = {});

SpectrumGrid synth_spectrum(const ZfsParams& zfs, double b_mag, const FrequencyGrid& grid,
                            double linewidth, const OrientationGrid& orientations,
                            unsigned threads = 1);

/// Same forward model evaluated at arbitrary ascending frequencies.
std::vector<double> powder_signal(const ZfsParams& zfs, double b_mag,
                                  std::span<const double> freqs, double linewidth,
                                  const OrientationGrid& orientations, unsigned threads = 1);

OdmrMap synth_odmr_map(const ZfsParams& zfs, std::span<const double> b_list,
                       const FrequencyGrid& grid, double linewidth,
                       const PowderOptions& opts = {});

OdmrMap synth_odmr_map(const ZfsParams& zfs, std::span<const double> b_list,
                       const FrequencyGrid& grid, double linewidth,
                       const OrientationGrid& orientations, unsigned threads = 1);

struct RabiOptions {
  // An orientation is captured when its nearest transition lies within
  // capture_factor x (largest possible Rabi frequency) of the drive.
  double capture_factor = 5.0;
  unsigned threads = 1;
};

/// Orientation-averaged two-level Rabi response. Per orientation the
/// transition nearest to `drive_freq` is driven with Rabi frequency
/// gamma_el*b1*sqrt(weight) and detuning (transition - drive).
RabiTrace ensemble_rabi(const ZfsParams& zfs, double b_mag, double drive_freq, double b1,
                        std::span<const double> times, const OrientationGrid& orientations,
                        const RabiOptions& opts = {});

RabiTrace ensemble_rabi(const ZfsParams& zfs, double b_mag, double drive_freq, double b1,
                        std::span<const double> times, std::size_t n_orient = 10000,
                        const RabiOptions& opts = {});

/// Range of a labeled pair's transition frequency over all orientations.
struct FrequencyRange {
  double lo = 0.0;
  double hi = 0.0;
};
FrequencyRange pair_frequency_range(const ZfsParams& zfs, double b_mag, PairLabel pair,
                                    const OrientationGrid& orientations);

}  // namespace fpq
