#pragma once

// Derivative-free bounded least squares and the specific fits used across the
// workbench: ZFS from powder spectra, stretched-exponential coherence decays,
// power-law decoupling scaling, the T1 temperature law and damped Rabi
// oscillations.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpqubit/powder.hpp"

namespace fpq {

struct Bound {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> uncertainties;  // 1 sigma, from the loss Hessian
  double residual_norm = 0.0;         // loss at the optimum
  double initial_loss = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;

  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
};

struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<std::vector<double>> sigma;
  std::string x_unit;
  std::string y_unit;

  void validate() const;
};

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-10;  // relative simplex spread
  int max_evaluations = 20000;
  int restarts = 1;  // fresh simplex around the optimum after convergence
  // Initial simplex offsets per parameter; empty means 5% of |x0|
  // (0.00025 when x0 is zero).
  std::vector<double> steps;
};

struct MinimizeResult {
  std::vector<double> x;
  double loss = 0.0;
  double initial_loss = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

/// Bounded Nelder-Mead; trial points are clamped into `bounds`.
/// Throws NumericalError when the loss at the initial point is not finite.
MinimizeResult nelder_mead(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> x0, std::span<const Bound> bounds,
                           const NelderMeadOptions& opts = {});

/// Predictions for every data point given parameters.
using VectorModel = std::function<std::vector<double>(std::span<const double>)>;
/// Prediction for one abscissa.
using PointModel = std::function<double(double, std::span<const double>)>;

struct Parameter {
  std::string name;
  double init = 0.0;
  Bound bound;
};

/// Minimizes sum(((y - model) / sigma)^2). Uncertainties come from a
/// central-difference Hessian of the loss (step 1e-4 relative); without
/// per-point sigma the covariance is scaled by loss / (n - p).
FitResult fit_least_squares(const VectorModel& model, const DataSeries& data,
                            std::span<const Parameter> params, const NelderMeadOptions& opts = {});

FitResult fit_least_squares(const PointModel& model, const DataSeries& data,
                            std::span<const Parameter> params, const NelderMeadOptions& opts = {});

// --- ZFS ------------------------------------------------------------------

struct ZfsGuess {
  double d = 0.0;
  double e = 0.0;
  double linewidth = 0.0;
  double amp_xz = 0.0;
  double amp_yz = 0.0;
};

/// Initial ZFS guess from the two dominant peaks of a zero/low-field spectrum.
ZfsGuess peak_init(const SpectrumGrid& spec);

struct ZfsFitOptions {
  double b_mag = 0.0;  // field of the spectrum, T
  std::size_t n_orient = 2000;
  unsigned threads = 1;
  double amp_xy = 0.0;  // held fixed
  std::optional<ZfsGuess> init;
  NelderMeadOptions optimizer;
};

/// Fits (d, e, linewidth, amp_xz, amp_yz) of the powder model to a spectrum.
FitResult fit_zfs(const SpectrumGrid& spec, const ZfsFitOptions& opts = {});

/// Joint fit over the map rows with |b| <= b_max (default 5 mT).
FitResult fit_zfs(const OdmrMap& map, double b_max = 5e-3, const ZfsFitOptions& opts = {});

// --- decays and scaling laws -----------------------------------------------

/// A exp(-(t/T2)^beta), beta in [0.3, 3]. Params: amplitude, t2, beta.
/// Non-decaying data yields converged = false.
FitResult fit_stretched_exp(const DataSeries& data, const NelderMeadOptions& opts = {});

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double exponent_sigma = 0.0;
};

/// Closed-form least squares of log(t2) = log(prefactor) + exponent log(n).
PowerLawFit fit_power_law(std::span<const double> n_values, std::span<const double> t2_values);

/// 1/T1 = relax_a T + relax_raman T^7, fitted in rate space with
/// non-negative amplitudes. `t1_sigma` (optional) is propagated as
/// sigma_rate = sigma_T1 / T1^2.
FitResult fit_t1_temperature(std::span<const double> temps, std::span<const double> t1s,
                             std::span<const double> t1_sigma = {},
                             const NelderMeadOptions& opts = {});

/// offset - amplitude exp(-rate t) cos(2 pi freq t). Params: offset,
/// amplitude, rate, freq.
FitResult fit_damped_cosine(std::span<const double> times, std::span<const double> signal,
                            const NelderMeadOptions& opts = {});

}  // namespace fpq
