#include "fpqubit/powder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/parallel.hpp"

namespace fpq {

namespace {

constexpr std::size_t kBlock = 128;  // orientations per reduction block
constexpr double kGaussCutoff = 6.0;  // deposit within +-6 sigma

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

double pair_amplitude(const ZfsParams& zfs, std::size_t i, std::size_t j) {
  switch (pair_label(i, j, zfs.e)) {
    case PairLabel::xz: return zfs.amp_xz;
    case PairLabel::yz: return zfs.amp_yz;
    case PairLabel::xy: return zfs.amp_xy;
  }
  return 0.0;
}

struct LineSet {
  std::array<double, 3> freq{};
  std::array<double, 3> weight{};  // averaged over the two perpendicular drive axes
};

constexpr std::array<std::array<std::size_t, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

LineSet orientation_lines(const ZfsParams& zfs, double b_mag, const Vector3& n) {
  const EnergyLevels lv = eigensolve(build_hamiltonian(zfs, FieldVector::along(n, b_mag)));
  const auto axes = perpendicular_axes(n);
  LineSet out;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [i, j] = kPairs[k];
    out.freq[k] = lv.levels[j] - lv.levels[i];
    out.weight[k] =
        0.5 * (coupling_weight(lv, i, j, axes[0]) + coupling_weight(lv, i, j, axes[1]));
  }
  return out;
}

void check_orientations(const OrientationGrid& g) {
  require(g.count() > 0, "orientation grid is empty");
}

}  // namespace

OrientationGrid fibonacci_sphere(std::size_t n) {
  require(n >= 1, "fibonacci_sphere: n must be >= 1");
  const double golden = constants::pi * (3.0 - std::sqrt(5.0));
  OrientationGrid g;
  g.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    Vector3 p(r * std::cos(phi), r * std::sin(phi), z);
    g.points.push_back(p.normalized());
  }
  return g;
}

FrequencyGrid FrequencyGrid::span(double lo, double hi, double step) {
  require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step),
          "frequency grid: non-finite bound");
  require(step > 0.0 && hi >= lo, "frequency grid: need step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  return {lo, step, count};
}

std::vector<double> FrequencyGrid::values() const {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

void FrequencyGrid::validate() const {
  require(count > 0, "frequency grid is empty");
  require(std::isfinite(start) && std::isfinite(step), "frequency grid: non-finite");
  require(count == 1 || step > 0.0, "frequency grid: step must be positive");
}

std::vector<double> OdmrMap::row(std::size_t b_index) const {
  const auto first = signal.begin() + static_cast<std::ptrdiff_t>(b_index * freqs.size());
  return {first, first + static_cast<std::ptrdiff_t>(freqs.size())};
}

std::vector<double> powder_signal(const ZfsParams& zfs, double b_mag,
                                  std::span<const double> freqs, double linewidth,
                                  const OrientationGrid& orientations, unsigned threads) {
  zfs.validate();
  check_orientations(orientations);
  require(!freqs.empty(), "powder_signal: empty frequency list");
  require(std::isfinite(b_mag), "powder_signal: non-finite field");
  require(std::isfinite(linewidth) && linewidth > 0.0, "powder_signal: linewidth must be > 0");
  require(std::is_sorted(freqs.begin(), freqs.end()), "powder_signal: frequencies not ascending");

  const double sigma = fwhm_to_sigma(linewidth);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double reach = kGaussCutoff * sigma;
  std::array<double, 3> amp{};
  for (std::size_t k = 0; k < 3; ++k) amp[k] = pair_amplitude(zfs, kPairs[k][0], kPairs[k][1]);

  const std::size_t n = orientations.count();
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(n_blocks);

  parallel_for(n_blocks, threads, [&](std::size_t b) {
    std::vector<double> acc(freqs.size(), 0.0);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t o = b * kBlock; o < end; ++o) {
      const LineSet lines = orientation_lines(zfs, b_mag, orientations.points[o]);
      for (std::size_t k = 0; k < 3; ++k) {
        const double height = amp[k] * lines.weight[k];
        if (height == 0.0) continue;
        const double f0 = lines.freq[k];
        auto lo = std::lower_bound(freqs.begin(), freqs.end(), f0 - reach);
        auto hi = std::upper_bound(lo, freqs.end(), f0 + reach);
        for (auto it = lo; it != hi; ++it) {
          const double x = *it - f0;
          acc[static_cast<std::size_t>(it - freqs.begin())] += height * std::exp(-x * x * inv_two_var);
        }
      }
    }
    partial[b] = std::move(acc);
  });

  std::vector<double> total(freqs.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : total) v *= inv_n;
  return total;
}

SpectrumGrid synth_spectrum(const ZfsParams& zfs, double b_mag, const FrequencyGrid& grid,
                            double linewidth, const OrientationGrid& orientations,
                            unsigned threads) {
  grid.validate();
  SpectrumGrid out;
  out.freqs = grid.values();
  out.linewidth = linewidth;
  out.signal = powder_signal(zfs, b_mag, out.freqs, linewidth, orientations, threads);
  return out;
}

SpectrumGrid synth_spectrum(const ZfsParams& zfs, double b_mag, const FrequencyGrid& grid,
                            double linewidth, const PowderOptions& opts) {
  return synth_spectrum(zfs, b_mag, grid, linewidth, fibonacci_sphere(opts.n_orient),
                        opts.threads);
}

OdmrMap synth_odmr_map(const ZfsParams& zfs, std::span<const double> b_list,
                       const FrequencyGrid& grid, double linewidth,
                       const OrientationGrid& orientations, unsigned threads) {
  require(!b_list.empty(), "synth_odmr_map: empty field list");
  grid.validate();
  OdmrMap map;
  map.b_values.assign(b_list.begin(), b_list.end());
  map.freqs = grid.values();
  map.linewidth = linewidth;
  map.signal.reserve(b_list.size() * map.freqs.size());
  for (double b : b_list) {
    const auto row = powder_signal(zfs, b, map.freqs, linewidth, orientations, threads);
    map.signal.insert(map.signal.end(), row.begin(), row.end());
  }
  return map;
}

OdmrMap synth_odmr_map(const ZfsParams& zfs, std::span<const double> b_list,
                       const FrequencyGrid& grid, double linewidth, const PowderOptions& opts) {
  return synth_odmr_map(zfs, b_list, grid, linewidth, fibonacci_sphere(opts.n_orient),
                        opts.threads);
}

RabiTrace ensemble_rabi(const ZfsParams& zfs, double b_mag, double drive_freq, double b1,
                        std::span<const double> times, const OrientationGrid& orientations,
                        const RabiOptions& opts) {
  zfs.validate();
  check_orientations(orientations);
  require(std::isfinite(drive_freq) && drive_freq > 0.0, "ensemble_rabi: drive_freq must be > 0");
  require(std::isfinite(b1) && b1 > 0.0, "ensemble_rabi: b1 must be > 0");
  require(std::isfinite(b_mag), "ensemble_rabi: non-finite field");
  require(opts.capture_factor > 0.0, "ensemble_rabi: capture_factor must be > 0");
  require(std::is_sorted(times.begin(), times.end()), "ensemble_rabi: times not ascending");

  // Spin-1 matrix elements are bounded by 2 in weight.
  const double omega_max = constants::gamma_el * b1 * std::sqrt(2.0);
  const double window = opts.capture_factor * omega_max;

  const std::size_t n = orientations.count();
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(n_blocks);
  std::vector<char> captured(n_blocks, 0);

  parallel_for(n_blocks, opts.threads, [&](std::size_t b) {
    std::vector<double> acc(times.size(), 0.0);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t o = b * kBlock; o < end; ++o) {
      const LineSet lines = orientation_lines(zfs, b_mag, orientations.points[o]);
      std::size_t best = 0;
      for (std::size_t k = 1; k < 3; ++k)
        if (std::abs(lines.freq[k] - drive_freq) < std::abs(lines.freq[best] - drive_freq)) best = k;
      const double detuning = lines.freq[best] - drive_freq;
      if (std::abs(detuning) <= window) captured[b] = 1;
      const double rabi = constants::gamma_el * b1 * std::sqrt(lines.weight[best]);
      const double gen2 = rabi * rabi + detuning * detuning;
      if (gen2 == 0.0) continue;
      const double amplitude = rabi * rabi / gen2;
      const double gen = std::sqrt(gen2);
      for (std::size_t t = 0; t < times.size(); ++t) {
        const double s = std::sin(gen * constants::pi * times[t]);
        acc[t] += amplitude * s * s;
      }
    }
    partial[b] = std::move(acc);
  });

  if (std::none_of(captured.begin(), captured.end(), [](char c) { return c != 0; }))
    throw NumericalError("ensemble_rabi: no transition within the capture window of the drive");

  RabiTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.drive_freq = drive_freq;
  trace.b1 = b1;
  trace.signal.assign(times.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t t = 0; t < times.size(); ++t) trace.signal[t] += p[t];
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : trace.signal) v *= inv_n;
  return trace;
}

RabiTrace ensemble_rabi(const ZfsParams& zfs, double b_mag, double drive_freq, double b1,
                        std::span<const double> times, std::size_t n_orient,
                        const RabiOptions& opts) {
  return ensemble_rabi(zfs, b_mag, drive_freq, b1, times, fibonacci_sphere(n_orient), opts);
}

FrequencyRange pair_frequency_range(const ZfsParams& zfs, double b_mag, PairLabel pair,
                                    const OrientationGrid& orientations) {
  zfs.validate();
  check_orientations(orientations);
  const auto [i, j] = pair_indices(pair, zfs.e);
  FrequencyRange r{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (const auto& n : orientations.points) {
    const EnergyLevels lv = eigensolve(build_hamiltonian(zfs, FieldVector::along(n, b_mag)));
    const double f = lv.levels[j] - lv.levels[i];
    r.lo = std::min(r.lo, f);
    r.hi = std::max(r.hi, f);
  }
  return r;
}

}  // namespace fpq
