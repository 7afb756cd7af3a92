#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fpqubit/coherence.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/fitting.hpp"

using namespace fpq;

namespace {
const ZfsParams kZfs{2.356e9, 0.458e9};

DataSeries series(const std::vector<double>& x, const std::vector<double>& y) {
  DataSeries d;
  d.x = x;
  d.y = y;
  return d;
}

SpectrumGrid noisy_spectrum(const ZfsParams& z, double noise, std::uint64_t seed, std::size_t n_orient = 2000) {
  auto s = synth_spectrum(z, 0.0, FrequencyGrid::span(1.0e9, 3.5e9, 10e6), 80e6, PowderOptions{n_orient, 1});
  const double peak = *std::max_element(s.signal.begin(), s.signal.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise * peak);
  for (auto& v : s.signal) v += g(rng);
  return s;
}
}  // namespace

TEST_CASE("straight line from a zero start") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i * 0.5);
    y.push_back(2.0 * x.back() + 1.0);
  }
  const std::vector<Parameter> p{{"slope", 0.0, {}}, {"intercept", 0.0, {}}};
  const auto r = fit_least_squares(PointModel([](double t, std::span<const double> q) { return q[0] * t + q[1]; }),
                                   series(x, y), p);
  CHECK(r.value("slope") == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.value("intercept") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.converged);
  CHECK(r.residual_norm <= r.initial_loss);
}

TEST_CASE("quartic bowl minimum") {
  const std::vector<double> x0{0.0};
  const std::vector<Bound> b{{}};
  const auto r = nelder_mead([](std::span<const double> x) { return std::pow(x[0] - 3.0, 4); }, x0, b);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(r.loss <= r.initial_loss);
}

TEST_CASE("bounds clamp the search and non-finite starts fail") {
  const std::vector<double> x0{0.5};
  const std::vector<Bound> b{{0.0, 1.0}};
  const auto r = nelder_mead([](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); }, x0, b);
  CHECK(r.x[0] <= 1.0);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return NAN; }, x0, b), NumericalError);
}

TEST_CASE("descent property over random quadratic problems") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int n = 0; n < 20; ++n) {
    const double a = u(rng), c = u(rng);
    std::vector<double> x0{u(rng), u(rng)};
    const std::vector<Bound> b{{}, {}};
    const auto r = nelder_mead(
        [&](std::span<const double> x) { return (x[0] - a) * (x[0] - a) + 4.0 * (x[1] - c) * (x[1] - c) + (x[0] - a) * (x[1] - c); },
        x0, b);
    CHECK(r.loss <= r.initial_loss);
    CHECK(r.x[0] == doctest::Approx(a).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("uncertainties match the analytic line-fit covariance") {
  // y = m x + c with known sigma: var(m) = 1 / sum((x - xbar)^2 / s^2).
  std::vector<double> x, y;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.1);
  for (int i = 0; i < 50; ++i) {
    x.push_back(i * 0.2);
    y.push_back(0.7 * x.back() - 0.3 + g(rng));
  }
  DataSeries d = series(x, y);
  d.sigma = std::vector<double>(x.size(), 0.1);
  const std::vector<Parameter> p{{"m", 0.0, {}}, {"c", 0.0, {}}};
  const auto r = fit_least_squares(PointModel([](double t, std::span<const double> q) { return q[0] * t + q[1]; }), d, p);
  double xbar = 0.0;
  for (double v : x) xbar += v;
  xbar /= x.size();
  double sxx = 0.0;
  for (double v : x) sxx += (v - xbar) * (v - xbar);
  CHECK(r.sigma("m") == doctest::Approx(0.1 / std::sqrt(sxx)).epsilon(0.01));
  CHECK_THROWS_AS(r.value("nope"), ValidationError);
}

TEST_CASE("peak_init on clean and noisy spectra") {
  const auto clean = synth_spectrum(kZfs, 0.0, FrequencyGrid::span(1.0e9, 3.5e9, 2e6), 80e6, PowderOptions{2000, 1});
  const auto g = peak_init(clean);
  CHECK(g.d == doctest::Approx(2.356e9).epsilon(1e-3));
  CHECK(g.e == doctest::Approx(0.458e9).epsilon(5e-3));
  CHECK(g.linewidth == doctest::Approx(80e6).epsilon(0.1));

  // Algebra on two synthetic peaks.
  SpectrumGrid two;
  for (double f = 1.0e9; f <= 3.5e9; f += 2e6) {
    two.freqs.push_back(f);
    two.signal.push_back(std::exp(-0.5 * std::pow((f - 1.898e9) / 30e6, 2)) +
                         1.2 * std::exp(-0.5 * std::pow((f - 2.814e9) / 30e6, 2)));
  }
  const auto g2 = peak_init(two);
  CHECK(g2.d == doctest::Approx(2.356e9).epsilon(1e-4));
  CHECK(g2.e == doctest::Approx(0.458e9).epsilon(1e-3));

  SpectrumGrid one;
  for (double f = 1.0e9; f <= 3.5e9; f += 2e6) {
    one.freqs.push_back(f);
    one.signal.push_back(std::exp(-0.5 * std::pow((f - 2.3e9) / 30e6, 2)));
  }
  CHECK_THROWS_AS(peak_init(one), ValidationError);

  const auto noisy = noisy_spectrum(kZfs, 0.1, 99);
  CHECK(std::abs(peak_init(noisy).d - 2.356e9) < 2.0 * 80e6);
}

TEST_CASE("fit_zfs round trip with 1% noise") {
  const auto s = noisy_spectrum(kZfs, 0.01, 5);
  const auto r = fit_zfs(s);
  CHECK(r.converged);
  CHECK(r.value("d") == doctest::Approx(kZfs.d).epsilon(0.005));
  CHECK(r.value("e") == doctest::Approx(kZfs.e).epsilon(0.005));
  CHECK(r.residual_norm <= r.initial_loss);
  for (double u : r.uncertainties) CHECK(u >= 0.0);

  const auto again = fit_zfs(s);
  CHECK(again.params == r.params);
  CHECK(again.uncertainties == r.uncertainties);
}

TEST_CASE("fit_zfs finds a missing transition") {
  ZfsParams z = kZfs;
  z.amp_yz = 0.0;
  const auto s = noisy_spectrum(z, 0.01, 6);
  ZfsFitOptions o;
  o.init = ZfsGuess{2.3e9, 0.5e9, 70e6, 1.0, 0.5};
  const auto r = fit_zfs(s, o);
  CHECK(r.value("amp_yz") < 0.05 * r.value("amp_xz"));
}

TEST_CASE("fit_zfs from map rows uses only the low-field rows") {
  const auto grid = FrequencyGrid::span(1.0e9, 3.5e9, 10e6);
  const std::vector<double> fields{0.0, 3e-3, 20e-3};
  OdmrMap map = synth_odmr_map(kZfs, fields, grid, 80e6, PowderOptions{2000, 1});
  // Corrupt the high-field row: it must not influence the fit.
  for (std::size_t i = 0; i < map.freqs.size(); ++i) map.signal[2 * map.freqs.size() + i] = 5.0;
  const auto r = fit_zfs(map);
  CHECK(r.value("d") == doctest::Approx(kZfs.d).epsilon(1e-3));
  CHECK(r.value("e") == doctest::Approx(kZfs.e).epsilon(1e-3));
}

TEST_CASE("fit_zfs bias stays below 0.5% across noise realizations") {
  double sum_d = 0.0, sum_e = 0.0;
  const int n = 20;
  const auto clean = synth_spectrum(kZfs, 0.0, FrequencyGrid::span(1.0e9, 3.5e9, 10e6), 80e6, PowderOptions{1000, 1});
  const double peak = *std::max_element(clean.signal.begin(), clean.signal.end());
  for (int k = 0; k < n; ++k) {
    SpectrumGrid s = clean;
    std::mt19937_64 rng(1000 + k);
    std::normal_distribution<double> g(0.0, peak / 20.0);
    for (auto& v : s.signal) v += g(rng);
    ZfsFitOptions o;
    o.n_orient = 1000;
    const auto r = fit_zfs(s, o);
    sum_d += r.value("d");
    sum_e += r.value("e");
  }
  CHECK(std::abs(sum_d / n / kZfs.d - 1.0) < 0.005);
  CHECK(std::abs(sum_e / n / kZfs.e - 1.0) < 0.005);
}

TEST_CASE("stretched exponential fits") {
  std::vector<double> t, y1, y2;
  for (int i = 0; i < 60; ++i) {
    t.push_back(i * 0.1e-6);
    y1.push_back(std::exp(-t.back() / 1.5e-6));
    y2.push_back(std::exp(-std::pow(t.back() / 2e-6, 2)));
  }
  const auto r1 = fit_stretched_exp(series(t, y1));
  CHECK(r1.value("t2") == doctest::Approx(1.5e-6).epsilon(1e-3));
  CHECK(r1.value("beta") == doctest::Approx(1.0).epsilon(1e-3));
  const auto r2 = fit_stretched_exp(series(t, y2));
  CHECK(r2.value("beta") == doctest::Approx(2.0).epsilon(1e-3));

  std::vector<double> tn, yn;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.05);
  for (int i = 0; i < 80; ++i) {
    tn.push_back(i * 0.5e-6);
    yn.push_back(std::exp(-std::pow(tn.back() / 10e-6, 1.2)) + g(rng));
  }
  CHECK(fit_stretched_exp(series(tn, yn)).value("t2") == doctest::Approx(10e-6).epsilon(0.1));

  std::vector<double> flat(t.size(), 1.0);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 1.0 + 0.01 * i;
  CHECK_FALSE(fit_stretched_exp(series(t, flat)).converged);
}

TEST_CASE("power-law scaling fits") {
  std::vector<double> n, t2, flat;
  for (double k : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 240.0}) {
    n.push_back(k);
    t2.push_back(3e-6 * std::pow(k, 0.4));
    flat.push_back(5e-6);
  }
  const auto p = fit_power_law(n, t2);
  CHECK(p.exponent == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(p.prefactor == doctest::Approx(3e-6).epsilon(1e-9));
  CHECK(std::abs(fit_power_law(n, flat).exponent) < 1e-12);

  std::vector<double> scaled(t2);
  for (auto& v : scaled) v *= 7.5;
  const auto ps = fit_power_law(n, scaled);
  CHECK(std::abs(ps.exponent - p.exponent) < 1e-12);
  CHECK(ps.prefactor == doctest::Approx(7.5 * p.prefactor).epsilon(1e-12));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> noisy(t2);
  for (auto& v : noisy) v *= std::exp(g(rng));
  CHECK(std::abs(fit_power_law(n, noisy).exponent - 0.4) <= 0.03);

  std::vector<double> bad(t2);
  bad[2] = -1.0;
  CHECK_THROWS_AS(fit_power_law(n, bad), ValidationError);
}

TEST_CASE("T1 temperature law fits") {
  std::vector<double> temps, t1s, t1_direct;
  for (double T = 80.0; T <= 200.0; T += 10.0) {
    temps.push_back(T);
    t1s.push_back(1.0 / t1_rate(T, 43.0, 47e-12));
    t1_direct.push_back(1.0 / t1_rate(T, 43.0, 0.0));
  }
  const auto r = fit_t1_temperature(temps, t1s);
  CHECK(r.value("relax_a") == doctest::Approx(43.0).epsilon(1e-3));
  CHECK(r.value("relax_raman") == doctest::Approx(47e-12).epsilon(1e-3));
  CHECK(fit_t1_temperature(temps, t1_direct).value("relax_raman") <= 1e-15);

  // Input order does not matter.
  std::vector<std::size_t> idx(temps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = idx.size() - 1 - i;
  std::swap(idx[0], idx[5]);
  std::vector<double> pt, p1;
  for (auto i : idx) {
    pt.push_back(temps[i]);
    p1.push_back(t1s[i]);
  }
  const auto rp = fit_t1_temperature(pt, p1);
  CHECK(rp.params == r.params);

  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> noisy(t1s);
  std::vector<double> sig;
  for (auto& v : noisy) {
    sig.push_back(0.05 * v);
    v *= 1.0 + g(rng);
  }
  // 5% on T1 is heteroscedastic in rate space: weight by the known sigma.
  const auto rn = fit_t1_temperature(temps, noisy, sig);
  CHECK(std::abs(rn.value("relax_a") - 43.0) <= 3.0 * rn.sigma("relax_a"));
  CHECK(std::abs(rn.value("relax_raman") - 47e-12) <= 3.0 * rn.sigma("relax_raman"));
}

TEST_CASE("damped cosine fit recovers rate and frequency") {
  std::vector<double> t, y;
  for (int i = 0; i < 300; ++i) {
    t.push_back(i * 2e-9);
    y.push_back(0.5 - 0.4 * std::exp(-2e6 * t.back()) * std::cos(2.0 * M_PI * 8e6 * t.back()));
  }
  const auto r = fit_damped_cosine(t, y);
  CHECK(r.value("rate") == doctest::Approx(2e6).epsilon(1e-4));
  CHECK(r.value("freq") == doctest::Approx(8e6).epsilon(1e-5));
}
