#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "fpqubit/coherence.hpp"
#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/fitting.hpp"

using namespace fpq;

namespace {

// |Y(omega)|^2 omega^2 / 2 by a fine midpoint sum over the toggling function.
double filter_oracle(std::size_t n, double total, double omega) {
  const int steps = 200000;
  const double dt = total / steps;
  std::complex<double> acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double t = (i + 0.5) * dt;
    int flips = 0;
    for (std::size_t k = 1; k <= n; ++k)
      if (t > total * (2.0 * k - 1.0) / (2.0 * n)) ++flips;
    acc += (flips % 2 == 0 ? 1.0 : -1.0) * std::polar(dt, omega * t);
  }
  return 0.5 * std::norm(acc) * omega * omega;
}

NoisePsd psd_with(double gamma, double amplitude = 1.0) {
  NoisePsd p;
  p.gamma_psd = gamma;
  p.amplitude = amplitude;
  return p;
}

double scaling_exponent(const NoisePsd& psd, const std::vector<double>& ns) {
  std::vector<double> t2;
  for (double n : ns) t2.push_back(solve_t2(psd, static_cast<std::size_t>(n)));
  return fit_power_law(ns, t2).exponent;
}

const std::vector<double> kPowersOfTwo{1, 2, 4, 8, 16, 32, 64, 128, 256};

}  // namespace

TEST_CASE("clock-transition effective gyromagnetic ratio") {
  const double e = 0.458e9;
  CHECK(clock_gamma_eff(0.0, e) == 0.0);
  CHECK(clock_gamma_eff(10.0, e) == doctest::Approx(constants::gamma_el).epsilon(1e-5));
  CHECK(clock_gamma_eff(7e-3, e) == doctest::Approx(11.0336e9).epsilon(1e-4));
  CHECK(clock_gamma_eff(0.1, 0.0) == doctest::Approx(constants::gamma_el));
  for (double b : {1e-4, 1e-3, 5e-3, 2e-2}) {
    CHECK(clock_gamma_eff(-b, e) == doctest::Approx(-clock_gamma_eff(b, e)));
    CHECK(std::abs(clock_gamma_eff(b, e)) <= constants::gamma_el);
  }
  CHECK_THROWS_AS(clock_gamma_eff(NAN, e), ValidationError);
}

TEST_CASE("clock model through two anchors") {
  const std::vector<double> b{0.0, 7e-3}, t2{1500e-9, 140e-9};
  const ClockModel m = fit_clock_model(b, t2, 0.458e9);
  CHECK(1.0 / hahn_rate_vs_field(0.0, m) == doctest::Approx(1500e-9).epsilon(1e-6));
  CHECK(1.0 / hahn_rate_vs_field(7e-3, m) == doctest::Approx(140e-9).epsilon(1e-6));
  CHECK(m.baseline_rate == doctest::Approx(1.0 / 1500e-9).epsilon(1e-6));
  double prev = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double r = hahn_rate_vs_field(0.5e-3 * i, m);
    CHECK(r >= prev);
    prev = r;
  }
  const std::vector<double> one{0.0};
  CHECK_THROWS_AS(fit_clock_model(one, one, 0.458e9), ValidationError);
}

TEST_CASE("filter function closed forms") {
  const double t = 10e-6;
  for (double x : {0.3, 2.0, 7.5, 31.0}) {
    const double w = x / t;
    CHECK(filter_function(CpmgSpec{0, t}, w) == doctest::Approx(2.0 * std::pow(std::sin(x / 2.0), 2)).epsilon(1e-12));
    CHECK(filter_function(CpmgSpec{1, t}, w) == doctest::Approx(8.0 * std::pow(std::sin(x / 4.0), 4)).epsilon(1e-12));
  }
  // Echo cancels static noise: F/omega^2 ~ omega^2 at low frequency.
  for (double x : {1e-3, 1e-4}) {
    CHECK(filter_function(CpmgSpec{1, t}, x / t) / std::pow(x, 4) == doctest::Approx(1.0 / 32.0).epsilon(1e-4));
    CHECK(filter_function(CpmgSpec{0, t}, x / t) / (x * x) == doctest::Approx(0.5).epsilon(1e-4));
  }
  for (std::size_t n : {2u, 3u, 8u}) {
    for (double x : {1.0, 12.0, 40.0}) {
      CAPTURE(n);
      CAPTURE(x);
      CHECK(filter_function(CpmgSpec{n, t}, x / t) == doctest::Approx(filter_oracle(n, t, x / t)).epsilon(1e-4));
    }
  }
  const auto pulses = CpmgSpec{4, 8.0}.pulse_times();
  CHECK(pulses == std::vector<double>{1.0, 3.0, 5.0, 7.0});
  CHECK_THROWS_AS(filter_function(CpmgSpec{1, 0.0}, 1.0), ValidationError);
}

TEST_CASE("dephasing integral properties") {
  const double t = 20e-6;
  CHECK(cpmg_chi(psd_with(0.5, 0.0), CpmgSpec{4, t}) == 0.0);
  CHECK(cpmg_coherence(psd_with(0.5, 0.0), CpmgSpec{4, t}) == 1.0);

  // White noise: chi = S0 T / 2 for every pulse count.
  const double s0 = 3e4;
  for (std::size_t n : {0u, 1u, 4u}) {
    CAPTURE(n);
    CHECK(cpmg_chi(psd_with(0.0, s0), CpmgSpec{n, t}) == doctest::Approx(s0 * t / 2.0).epsilon(0.01));
  }

  const NoisePsd pink = psd_with(2.0 / 3.0, 1e8);
  double prev = INFINITY;
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    const double chi = cpmg_chi(pink, CpmgSpec{n, t});
    CHECK(chi <= prev);
    const double w = cpmg_coherence(pink, CpmgSpec{n, t});
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    prev = chi;
  }

  QuadratureOptions fine;
  fine.points_per_decade *= 2.0;
  fine.max_step_x *= 0.5;
  for (std::size_t n : {1u, 16u, 256u}) {
    const double a = cpmg_chi(pink, CpmgSpec{n, t});
    const double b = cpmg_chi(pink, CpmgSpec{n, t}, fine);
    CHECK(std::abs(a - b) <= 1e-3 * b);
  }
}

TEST_CASE("T2 solves chi = 1") {
  const NoisePsd pink = psd_with(2.0 / 3.0, 1e8);
  for (std::size_t n : {1u, 10u, 100u}) {
    const double t2 = solve_t2(pink, n);
    CHECK(std::abs(cpmg_chi(pink, CpmgSpec{n, t2}) - 1.0) < 1e-5);
  }
  NoisePsd cut = pink;
  cut.low_cutoff = 1e3;
  cut.high_cutoff = 1e10;
  const double t2 = solve_t2(cut, 8);
  CHECK(std::abs(cpmg_chi(cut, CpmgSpec{8, t2}) - 1.0) < 1e-5);
  CHECK_THROWS_AS(solve_t2(psd_with(0.5, 0.0), 4), NumericalError);
}

TEST_CASE("amplitude calibrated at 240 pulses reproduces 16 us") {
  NoisePsd unit = psd_with(2.0 / 3.0, 1.0);
  NoisePsd psd = unit;
  psd.amplitude = 1.0 / cpmg_chi(unit, CpmgSpec{240, 16e-6});
  CHECK(solve_t2(psd, 240) == doctest::Approx(16e-6).epsilon(1e-5));
}

TEST_CASE("decoupling scaling exponent") {
  const double e = scaling_exponent(psd_with(2.0 / 3.0, 1e8), kPowersOfTwo);
  CHECK(e >= 0.37);
  CHECK(e <= 0.43);
  CHECK(std::abs(scaling_exponent(psd_with(0.0, 1e5), kPowersOfTwo)) < 0.01);
}

TEST_CASE("noise exponent recovered from the scaling") {
  CHECK(psd_exponent_from_scaling(0.4) == doctest::Approx(2.0 / 3.0));
  CHECK(psd_exponent_from_scaling(0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(psd_exponent_from_scaling(1.0), ValidationError);
  CHECK_THROWS_AS(psd_exponent_from_scaling(0.0), ValidationError);
  // Finite-N corrections grow as gamma approaches 1, so stay at large N.
  const std::vector<double> ns{16, 32, 64, 128, 256};
  for (double g : {1.0 / 3.0, 2.0 / 3.0, 0.85}) {
    CAPTURE(g);
    const double e = scaling_exponent(psd_with(g, 1e8), ns);
    CHECK(std::abs(psd_exponent_from_scaling(e) - g) < 0.05);
  }
}

TEST_CASE("1/f-like noise needs a low cutoff") {
  CHECK_THROWS_AS(cpmg_chi(psd_with(1.0, 1e8), CpmgSpec{1, 1e-5}), ValidationError);
  CHECK_THROWS_AS(solve_t2(psd_with(1.5, 1e8), 1), ValidationError);
  NoisePsd ok = psd_with(1.5, 1e8);
  ok.low_cutoff = 1e2;
  CHECK(cpmg_chi(ok, CpmgSpec{1, 1e-5}) > 0.0);
  NoisePsd bad = psd_with(0.5, 1.0);
  bad.low_cutoff = 1e6;
  bad.high_cutoff = 1e3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("spin-lattice relaxation law") {
  const double a = 43.0, b = 47e-12;
  CHECK(t1_rate(80.0, a, b) == doctest::Approx(4425.66).epsilon(1e-5));
  CHECK(1.0 / t1_rate(80.0, a, b) == doctest::Approx(225.95e-6).epsilon(1e-4));
  const double crossover = std::pow(a / b, 1.0 / 6.0);
  CHECK(crossover == doctest::Approx(98.528).epsilon(1e-4));
  CHECK(a * crossover == doctest::Approx(b * std::pow(crossover, 7)));
  CHECK(t1_rate(10.0, a, 0.0) == doctest::Approx(430.0));
  CHECK_THROWS_AS(t1_rate(0.0, a, b), ValidationError);
}
