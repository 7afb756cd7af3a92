#include "fpqubit/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/fitting.hpp"

namespace fpq {

namespace {

using cd = std::complex<double>;

// Toggling-function switch points on the unit interval and the weights with
// which e^{i x tau} enters omega * y(omega). For y = +1, -1, +1, ... the
// weights are -1 at 0, 2(-1)^{k-1} at pulse k and (-1)^N at 1.
struct Switches {
  std::vector<double> tau;
  std::vector<double> weight;
};

Switches switches(std::size_t n_pulses) {
  Switches s;
  s.tau.reserve(n_pulses + 2);
  s.weight.reserve(n_pulses + 2);
  s.tau.push_back(0.0);
  s.weight.push_back(-1.0);
  for (std::size_t k = 1; k <= n_pulses; ++k) {
    s.tau.push_back((2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(n_pulses)));
    s.weight.push_back(k % 2 == 1 ? 2.0 : -2.0);
  }
  s.tau.push_back(1.0);
  s.weight.push_back(n_pulses % 2 == 0 ? 1.0 : -1.0);
  return s;
}

// F at x = omega * T, evaluated directly.
double filter_at(const Switches& s, double x) {
  cd acc = 0.0;
  for (std::size_t k = 0; k < s.tau.size(); ++k) acc += s.weight[k] * std::polar(1.0, x * s.tau[k]);
  return 0.5 * std::norm(acc);
}

// Integral of psd_x(x) F(x) / x^2 over [x_lo, x_hi]: trapezoid in ln x where
// the logarithmic step is below max_step_x, uniform trapezoid in x beyond.
template <class Psd>
double filter_integral(const Switches& s, double x_lo, double x_hi, const QuadratureOptions& q, Psd&& psd_x) {
  if (!(x_hi > x_lo)) return 0.0;
  const double du = std::log(10.0) / q.points_per_decade;
  const double h = q.max_step_x;
  const double x_switch = std::clamp(h / du, x_lo, x_hi);

  auto integrand = [&](double x) { return psd_x(x) * filter_at(s, x) / (x * x); };

  double total = 0.0;
  // Logarithmic part, integrand g(x) x in u = ln x.
  if (x_switch > x_lo) {
    const double u0 = std::log(x_lo);
    const double u1 = std::log(x_switch);
    const auto m = static_cast<std::size_t>(std::ceil((u1 - u0) / du));
    const double step = (u1 - u0) / static_cast<double>(m);
    double sum = 0.5 * (integrand(x_lo) * x_lo + integrand(x_switch) * x_switch);
    for (std::size_t i = 1; i < m; ++i) {
      const double x = std::exp(u0 + step * static_cast<double>(i));
      sum += integrand(x) * x;
    }
    total += sum * step;
  }
  // Uniform part. The phasors e^{i x tau_k} advance by a fixed rotation per
  // step and are re-seeded exactly every 1024 steps.
  if (x_hi > x_switch) {
    const auto m = static_cast<std::size_t>(std::ceil((x_hi - x_switch) / h));
    const double step = (x_hi - x_switch) / static_cast<double>(m);
    const std::size_t nk = s.tau.size();
    std::vector<cd> phasor(nk), rot(nk);
    for (std::size_t k = 0; k < nk; ++k) rot[k] = std::polar(1.0, step * s.tau[k]);
    double sum = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double x = x_switch + step * static_cast<double>(i);
      if (i % 1024 == 0)
        for (std::size_t k = 0; k < nk; ++k) phasor[k] = std::polar(1.0, x * s.tau[k]);
      cd acc = 0.0;
      for (std::size_t k = 0; k < nk; ++k) {
        acc += s.weight[k] * phasor[k];
        phasor[k] *= rot[k];
      }
      const double g = psd_x(x) * 0.5 * std::norm(acc) / (x * x);
      sum += (i == 0 || i == m) ? 0.5 * g : g;
    }
    total += sum * step;
  }
  return total;
}

void require_convergent(const NoisePsd& psd) {
  if (psd.gamma_psd >= 1.0 && !psd.low_cutoff)
    throw ValidationError("noise PSD with gamma_psd >= 1 needs an explicit low cutoff");
}

struct Range {
  double lo, hi;
};

Range omega_range(const NoisePsd& psd, const CpmgSpec& spec, const QuadratureOptions& q) {
  const double t = spec.total_time;
  const double n = static_cast<double>(std::max<std::size_t>(spec.n_pulses, 1));
  return {psd.low_cutoff.value_or(q.low_factor / t), psd.high_cutoff.value_or(q.high_factor * n / t)};
}

void check_quadrature(const QuadratureOptions& q) {
  require(q.points_per_decade > 0.0 && q.max_step_x > 0.0 && q.low_factor > 0.0 && q.high_factor > 0.0,
          "quadrature options must be positive");
}

}  // namespace

void NoisePsd::validate() const {
  require(std::isfinite(amplitude) && amplitude >= 0.0, "NoisePsd: amplitude must be >= 0");
  require(std::isfinite(gamma_psd) && gamma_psd >= 0.0 && gamma_psd <= 2.0, "NoisePsd: gamma_psd must lie in [0, 2]");
  if (low_cutoff) require(std::isfinite(*low_cutoff) && *low_cutoff > 0.0, "NoisePsd: low cutoff must be > 0");
  if (high_cutoff) require(std::isfinite(*high_cutoff) && *high_cutoff > 0.0, "NoisePsd: high cutoff must be > 0");
  if (low_cutoff && high_cutoff) require(*low_cutoff < *high_cutoff, "NoisePsd: cutoffs out of order");
}

double NoisePsd::operator()(double omega) const {
  if (low_cutoff && omega < *low_cutoff) return 0.0;
  if (high_cutoff && omega > *high_cutoff) return 0.0;
  return amplitude * std::pow(omega, -gamma_psd);
}

void CpmgSpec::validate() const {
  require(std::isfinite(total_time) && total_time > 0.0, "CpmgSpec: total_time must be > 0");
}

std::vector<double> CpmgSpec::pulse_times() const {
  std::vector<double> t;
  t.reserve(n_pulses);
  for (std::size_t k = 1; k <= n_pulses; ++k)
    t.push_back(total_time * (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(n_pulses)));
  return t;
}

void ClockModel::validate() const {
  require(std::isfinite(e) && e >= 0.0 && std::isfinite(baseline_rate) && baseline_rate >= 0.0 &&
              std::isfinite(slope_c) && slope_c >= 0.0,
          "ClockModel: fields must be finite and >= 0");
}

double clock_gamma_eff(double b_z, double e) {
  require(std::isfinite(b_z) && std::isfinite(e), "clock_gamma_eff: non-finite input");
  const double b_clock = e / constants::gamma_el;
  const double denom = std::hypot(b_clock, b_z);
  if (denom == 0.0) return 0.0;
  return constants::gamma_el * b_z / denom;
}

double hahn_rate_vs_field(double b_z, const ClockModel& model) {
  model.validate();
  return model.baseline_rate + model.slope_c * clock_gamma_eff(b_z, model.e);
}

ClockModel fit_clock_model(std::span<const double> b_z, std::span<const double> t2, double e) {
  require(b_z.size() == t2.size() && b_z.size() >= 2, "fit_clock_model: need >= 2 matched points");
  std::vector<std::size_t> order(b_z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return b_z[a] < b_z[b]; });

  DataSeries data;
  for (std::size_t i : order) {
    require(t2[i] > 0.0, "fit_clock_model: T2 must be positive");
    data.x.push_back(b_z[i]);
    data.y.push_back(1.0 / t2[i]);
  }
  // Linear start: rate = baseline + slope * gamma_eff.
  const double g_lo = clock_gamma_eff(data.x.front(), e);
  const double g_hi = clock_gamma_eff(data.x.back(), e);
  double slope0 = g_hi != g_lo ? (data.y.back() - data.y.front()) / (g_hi - g_lo) : 0.0;
  slope0 = std::max(slope0, 0.0);
  const double base0 = std::max(data.y.front() - slope0 * g_lo, 0.0);

  const double rate_max = *std::max_element(data.y.begin(), data.y.end());
  NelderMeadOptions opts;
  opts.steps = {0.05 * std::max(base0, 1e-3 * rate_max), 0.05 * std::max(slope0, 1e-3 * rate_max / constants::gamma_el)};
  const std::vector<Parameter> params{{"baseline_rate", base0, {0.0, std::numeric_limits<double>::infinity()}},
                                      {"slope_c", slope0, {0.0, std::numeric_limits<double>::infinity()}}};
  PointModel model = [e](double b, std::span<const double> p) { return p[0] + p[1] * clock_gamma_eff(b, e); };
  const FitResult r = fit_least_squares(model, data, params, opts);
  return {e, r.params[0], r.params[1]};
}

double filter_function(const CpmgSpec& spec, double omega) {
  spec.validate();
  require(std::isfinite(omega) && omega > 0.0, "filter_function: omega must be > 0");
  return filter_at(switches(spec.n_pulses), omega * spec.total_time);
}

double cpmg_chi(const NoisePsd& psd, const CpmgSpec& spec, const QuadratureOptions& q) {
  psd.validate();
  spec.validate();
  check_quadrature(q);
  require_convergent(psd);
  if (psd.amplitude == 0.0) return 0.0;
  const double t = spec.total_time;
  const Range w = omega_range(psd, spec, q);
  const Switches s = switches(spec.n_pulses);
  // chi = (T / pi) int S(x / T) F(x) / x^2 dx.
  const double integral =
      filter_integral(s, w.lo * t, w.hi * t, q, [&](double x) { return psd.amplitude * std::pow(x / t, -psd.gamma_psd); });
  return std::max(0.0, t / constants::pi * integral);
}

double cpmg_coherence(const NoisePsd& psd, const CpmgSpec& spec, const QuadratureOptions& q) {
  return std::exp(-cpmg_chi(psd, spec, q));
}

double solve_t2(const NoisePsd& psd, std::size_t n_pulses, const QuadratureOptions& q) {
  psd.validate();
  check_quadrature(q);
  require_convergent(psd);
  if (psd.amplitude == 0.0) throw NumericalError("solve_t2: zero noise, chi never reaches 1");

  // Without absolute cutoffs the integration range scales with T, so
  // chi(T) = amplitude T^(1+gamma) J / pi with J independent of T.
  std::function<double(double)> chi;
  if (!psd.low_cutoff && !psd.high_cutoff) {
    const double n = static_cast<double>(std::max<std::size_t>(n_pulses, 1));
    const Switches s = switches(n_pulses);
    const double j = filter_integral(s, q.low_factor, q.high_factor * n, q,
                                     [&](double x) { return std::pow(x, -psd.gamma_psd); });
    chi = [&psd, j](double t) { return psd.amplitude * std::pow(t, 1.0 + psd.gamma_psd) * j / constants::pi; };
  } else {
    chi = [&psd, n_pulses, &q](double t) { return cpmg_chi(psd, CpmgSpec{n_pulses, t}, q); };
  }

  double lo = 1e-6, hi = 1e-6;
  int expansions = 0;
  while (chi(hi) < 1.0) {
    hi *= 2.0;
    if (++expansions > 200) throw NumericalError("solve_t2: could not bracket chi = 1");
  }
  expansions = 0;
  while (chi(lo) > 1.0) {
    lo *= 0.5;
    if (++expansions > 200) throw NumericalError("solve_t2: could not bracket chi = 1");
  }
  if (lo == hi) lo = hi * 0.5;
  while ((hi - lo) > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (chi(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double psd_exponent_from_scaling(double e_scaling) {
  require(std::isfinite(e_scaling) && e_scaling > 0.0 && e_scaling < 1.0,
          "psd_exponent_from_scaling: exponent must lie in (0, 1)");
  return e_scaling / (1.0 - e_scaling);
}

double t1_rate(double temp, double relax_a, double relax_raman) {
  require(std::isfinite(temp) && temp > 0.0, "t1_rate: temperature must be > 0");
  return relax_a * temp + relax_raman * std::pow(temp, 7);
}

}  // namespace fpq
