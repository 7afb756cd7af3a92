#include "fpqubit/sensing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"

namespace fpq {

void SensorBudget::validate() const {
  require(std::isfinite(contrast) && contrast > 0.0 && contrast <= 1.0, "SensorBudget: contrast must lie in (0, 1]");
  require(std::isfinite(photons_per_shot) && photons_per_shot > 0.0, "SensorBudget: photons_per_shot must be > 0");
  require(std::isfinite(molecules) && molecules > 0.0, "SensorBudget: molecules must be > 0");
  require(std::isfinite(t_init) && t_init > 0.0 && std::isfinite(t_read) && t_read > 0.0 &&
              std::isfinite(t_evolve) && t_evolve > 0.0,
          "SensorBudget: times must be > 0");
  require(std::isfinite(overhead) && overhead > 0.0, "SensorBudget: overhead must be > 0");
}

FieldSpectrumModel powder_model(const ZfsParams& zfs, double linewidth, std::size_t n_orient, unsigned threads) {
  zfs.validate();
  auto grid = std::make_shared<const OrientationGrid>(fibonacci_sphere(n_orient));
  return [zfs, linewidth, grid, threads](double field, std::span<const double> freqs) {
    return powder_signal(zfs, field, freqs, linewidth, *grid, threads);
  };
}

SlopeResult two_point_slope(const FieldSpectrumModel& model, double bias_field, double f_low, double f_high,
                            double delta) {
  require(std::isfinite(bias_field) && std::isfinite(f_low) && std::isfinite(f_high), "two_point_slope: non-finite input");
  require(std::isfinite(delta) && delta > 0.0, "two_point_slope: delta must be > 0");
  require(f_low <= f_high, "two_point_slope: need f_low <= f_high");
  const std::array<double, 2> probes{f_low, f_high};
  auto diff = [&](double b) {
    const auto s = model(b, probes);
    return s[1] - s[0];
  };
  SlopeResult r;
  r.slope = (diff(bias_field + delta) - diff(bias_field - delta)) / (2.0 * delta);
  // Relative to the scale of the probed signals.
  const auto at = model(bias_field, probes);
  const double scale = std::max({std::abs(at[0]), std::abs(at[1]), 1e-300});
  r.zero = std::abs(r.slope) * delta <= 1e-9 * scale;
  return r;
}

TwoPointScheme choose_two_point_scheme(const FieldSpectrumModel& model, double bias_field, double f_center,
                                       double f_min, double f_max, double f_step, double delta) {
  require(f_min < f_center && f_center < f_max && f_step > 0.0, "choose_two_point_scheme: bad scan range");
  std::vector<double> freqs;
  for (double f = f_min; f <= f_max; f += f_step) freqs.push_back(f);
  const auto up = model(bias_field + delta, freqs);
  const auto down = model(bias_field - delta, freqs);
  const auto mid = model(bias_field, freqs);
  std::vector<double> deriv(freqs.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    deriv[i] = (up[i] - down[i]) / (2.0 * delta);
    peak = std::max(peak, std::abs(mid[i]));
  }
  require(peak > 0.0, "choose_two_point_scheme: model signal vanishes over the scan");

  std::size_t lo_max = 0, lo_min = 0, hi_max = 0, hi_min = 0;
  bool have_lo = false, have_hi = false;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] < f_center) {
      if (!have_lo || deriv[i] > deriv[lo_max]) lo_max = i;
      if (!have_lo || deriv[i] < deriv[lo_min]) lo_min = i;
      have_lo = true;
    } else {
      if (!have_hi || deriv[i] > deriv[hi_max]) hi_max = i;
      if (!have_hi || deriv[i] < deriv[hi_min]) hi_min = i;
      have_hi = true;
    }
  }
  require(have_lo && have_hi, "choose_two_point_scheme: scan does not straddle the center");
  const double a = deriv[hi_max] - deriv[lo_min];
  const double b = deriv[hi_min] - deriv[lo_max];
  TwoPointScheme s;
  s.bias_field = bias_field;
  s.f_low = std::abs(a) >= std::abs(b) ? freqs[lo_min] : freqs[lo_max];
  s.f_high = std::abs(a) >= std::abs(b) ? freqs[hi_max] : freqs[hi_min];
  s.slope = two_point_slope(model, bias_field, s.f_low, s.f_high, delta).slope / peak;
  return s;
}

Sensitivity dc_sensitivity(const SensorBudget& budget, const TwoPointScheme& scheme) {
  budget.validate();
  require(std::isfinite(scheme.slope) && scheme.slope != 0.0, "dc_sensitivity: two-point slope is zero");
  const double n = budget.photons();
  const double sigma_b = std::sqrt(2.0 * n) / (n * std::abs(budget.contrast * scheme.slope));
  Sensitivity s;
  s.eta = sigma_b * std::sqrt(budget.t_shot());
  s.eta_molar = s.eta * std::sqrt(budget.molecules / constants::avogadro);
  return s;
}

Sensitivity ac_sensitivity(const SensorBudget& budget, double t2) {
  budget.validate();
  require(std::isfinite(t2) && t2 > 0.0, "ac_sensitivity: T2 must be > 0");
  require(budget.t_evolve <= t2 * (1.0 + 1e-12), "ac_sensitivity: evolution time exceeds T2");
  Sensitivity s;
  s.eta = std::sqrt(budget.t_shot()) /
          (2.0 * constants::pi * constants::gamma_el * budget.contrast * budget.t_evolve * std::sqrt(budget.photons()));
  s.eta_molar = s.eta * std::sqrt(budget.molecules / constants::avogadro);
  return s;
}

double dipole_field(double r, double moment, bool axial) {
  require(std::isfinite(r) && r > 0.0, "dipole_field: r must be > 0");
  require(std::isfinite(moment), "dipole_field: non-finite moment");
  return constants::mu0_over_4pi * (axial ? 2.0 : 1.0) * moment / (r * r * r);
}

double proton_number_sensitivity(double eta_molar, double polarization, double field_per_proton) {
  require(std::isfinite(polarization) && polarization > 0.0 && polarization <= 1.0,
          "proton_number_sensitivity: polarization must lie in (0, 1]");
  require(std::isfinite(field_per_proton) && field_per_proton > 0.0,
          "proton_number_sensitivity: field per proton must be > 0");
  require(std::isfinite(eta_molar) && eta_molar > 0.0, "proton_number_sensitivity: sensitivity must be > 0");
  const double ratio = eta_molar / field_per_proton;
  return ratio * ratio / polarization;
}

}  // namespace fpq
