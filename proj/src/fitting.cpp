#include "fpqubit/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "fpqubit/errors.hpp"

namespace fpq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_to(double v, const Bound& b) { return std::min(std::max(v, b.lo), b.hi); }

double sanitize(double f) { return std::isnan(f) ? kInf : f; }

struct Vertex {
  std::vector<double> x;
  double f = kInf;
};

}  // namespace

// --- Nelder-Mead -----------------------------------------------------------

MinimizeResult nelder_mead(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> x0, std::span<const Bound> bounds,
                           const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  require(n > 0, "nelder_mead: no parameters");
  require(bounds.size() == n, "nelder_mead: bounds size mismatch");
  require(opts.steps.empty() || opts.steps.size() == n, "nelder_mead: steps size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    require(std::isfinite(x0[j]), "nelder_mead: non-finite initial point");
    require(bounds[j].lo <= x0[j] && x0[j] <= bounds[j].hi, "nelder_mead: initial point outside bounds");
  }

  MinimizeResult res;
  auto eval = [&](std::span<const double> x) {
    ++res.evaluations;
    return sanitize(loss(x));
  };
  auto clamp_point = [&](std::vector<double>& x) {
    for (std::size_t j = 0; j < n; ++j) x[j] = clamp_to(x[j], bounds[j]);
  };

  std::vector<double> best(x0.begin(), x0.end());
  double best_f = eval(best);
  res.initial_loss = best_f;
  if (!std::isfinite(best_f)) throw NumericalError("nelder_mead: loss is not finite at the initial point");

  std::vector<double> step0(n);
  for (std::size_t j = 0; j < n; ++j) {
    step0[j] = opts.steps.empty() ? (x0[j] != 0.0 ? 0.05 * std::abs(x0[j]) : 0.00025)
                                  : std::abs(opts.steps[j]);
    if (step0[j] == 0.0) step0[j] = 0.00025;
  }

  bool converged = false;
  for (int round = 0; round <= opts.restarts; ++round) {
    std::vector<Vertex> simplex(n + 1);
    simplex[0].x = best;
    simplex[0].f = best_f;
    for (std::size_t j = 0; j < n; ++j) {
      auto& v = simplex[j + 1];
      v.x = best;
      const double s = round == 0 || opts.steps.size() == n ? step0[j]
                                                           : std::max(0.05 * std::abs(best[j]), 1e-3 * step0[j]);
      double trial = best[j] + s;
      if (trial > bounds[j].hi) trial = best[j] - s;
      v.x[j] = clamp_to(trial, bounds[j]);
      v.f = eval(v.x);
    }

    converged = false;
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (res.evaluations < opts.max_evaluations) {
      std::stable_sort(simplex.begin(), simplex.end(),
                       [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      const Vertex& lo = simplex.front();

      // Convergence: function spread or per-coordinate simplex spread.
      const double f_spread = simplex.back().f - lo.f;
      bool x_small = true;
      for (std::size_t j = 0; j < n && x_small; ++j) {
        double spread = 0.0;
        for (const auto& v : simplex) spread = std::max(spread, std::abs(v.x[j] - lo.x[j]));
        x_small = spread <= opts.tolerance * std::max(std::abs(lo.x[j]), step0[j]);
      }
      const bool f_small = std::isfinite(simplex.back().f) &&
                           f_spread <= opts.tolerance * std::abs(lo.f) + 1e-300;
      if (x_small || f_small) {
        converged = true;
        break;
      }
      ++res.iterations;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
      for (double& c : centroid) c /= static_cast<double>(n);

      Vertex& worst = simplex.back();
      const double f_second = simplex[n - 1].f;

      for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + opts.reflection * (centroid[j] - worst.x[j]);
      clamp_point(xr);
      const double fr = eval(xr);

      if (fr < lo.f) {
        for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + opts.expansion * (xr[j] - centroid[j]);
        clamp_point(xe);
        const double fe = eval(xe);
        if (fe < fr) {
          worst.x = xe;
          worst.f = fe;
        } else {
          worst.x = xr;
          worst.f = fr;
        }
        continue;
      }
      if (fr < f_second) {
        worst.x = xr;
        worst.f = fr;
        continue;
      }

      bool accepted = false;
      if (fr < worst.f) {
        for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + opts.contraction * (xr[j] - centroid[j]);
        clamp_point(xc);
        const double fc = eval(xc);
        if (fc <= fr) {
          worst.x = xc;
          worst.f = fc;
          accepted = true;
        }
      } else {
        for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + opts.contraction * (worst.x[j] - centroid[j]);
        clamp_point(xc);
        const double fc = eval(xc);
        if (fc < worst.f) {
          worst.x = xc;
          worst.f = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            simplex[i].x[j] = lo.x[j] + opts.shrink * (simplex[i].x[j] - lo.x[j]);
          clamp_point(simplex[i].x);
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }

    const auto it = std::min_element(simplex.begin(), simplex.end(),
                                      [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const bool improved = it->f < best_f;
    if (it->f <= best_f) {
      best = it->x;
      best_f = it->f;
    }
    if (!converged || res.evaluations >= opts.max_evaluations) break;
    // A restart that found nothing better confirms the optimum.
    if (round > 0 && !improved) break;
  }

  res.x = std::move(best);
  res.loss = best_f;
  res.converged = converged;
  return res;
}

// --- least squares -------------------------------------------------------

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw ValidationError("FitResult: no parameter named " + name);
}

double FitResult::sigma(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return uncertainties[i];
  throw ValidationError("FitResult: no parameter named " + name);
}

void DataSeries::validate() const {
  require(x.size() == y.size(), "DataSeries: x and y lengths differ");
  require(!x.empty(), "DataSeries: empty");
  for (std::size_t i = 0; i < x.size(); ++i)
    require(std::isfinite(x[i]) && std::isfinite(y[i]), "DataSeries: non-finite value");
  require(std::is_sorted(x.begin(), x.end()), "DataSeries: x not ascending");
  if (sigma) {
    require(sigma->size() == x.size(), "DataSeries: sigma length differs");
    for (double s : *sigma) require(std::isfinite(s) && s > 0.0, "DataSeries: sigma must be positive");
  }
}

namespace {

double chi2(const std::vector<double>& pred, const DataSeries& data) {
  if (pred.size() != data.y.size()) return kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double r = data.y[i] - pred[i];
    if (data.sigma) r /= (*data.sigma)[i];
    s += r * r;
  }
  return sanitize(s);
}

// Covariance from the loss Hessian: cov = 2 H^-1 (times loss/(n-p) when the
// data carry no per-point sigma).
std::vector<double> hessian_uncertainties(const std::function<double(std::span<const double>)>& loss,
                                          const std::vector<double>& x, double f0,
                                          std::size_t n_data, bool weighted) {
  const std::size_t p = x.size();
  std::vector<double> h(p);
  for (std::size_t j = 0; j < p; ++j) h[j] = 1e-4 * std::max(std::abs(x[j]), 1e-12);

  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    std::vector<double> y = x;
    y[i] += di;
    y[j] += dj;
    return loss(y);
  };

  Eigen::MatrixXd hess(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    hess(i, i) = (at(i, h[i], i, 0.0) - 2.0 * f0 + at(i, -h[i], i, 0.0)) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < p; ++j) {
      const double v = (at(i, h[i], j, h[j]) - at(i, h[i], j, -h[j]) - at(i, -h[i], j, h[j]) +
                        at(i, -h[i], j, -h[j])) /
                       (4.0 * h[i] * h[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }

  const double scale = weighted ? 1.0
                                : (n_data > p ? f0 / static_cast<double>(n_data - p) : 0.0);
  std::vector<double> out(p, 0.0);
  if (!hess.allFinite()) return out;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  bool full_ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  Eigen::MatrixXd cov;
  if (full_ok) {
    cov = 2.0 * scale * ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    for (std::size_t j = 0; j < p; ++j) full_ok = full_ok && std::isfinite(cov(j, j)) && cov(j, j) >= 0.0;
  }
  for (std::size_t j = 0; j < p; ++j) {
    double var = full_ok ? cov(j, j) : (hess(j, j) > 0.0 ? 2.0 * scale / hess(j, j) : 0.0);
    out[j] = std::isfinite(var) && var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return out;
}

}  // namespace

FitResult fit_least_squares(const VectorModel& model, const DataSeries& data,
                            std::span<const Parameter> params, const NelderMeadOptions& opts) {
  data.validate();
  require(!params.empty(), "fit_least_squares: no parameters");
  std::vector<double> x0;
  std::vector<Bound> bounds;
  for (const auto& p : params) {
    x0.push_back(p.init);
    bounds.push_back(p.bound);
  }
  auto loss = [&](std::span<const double> x) { return chi2(model(x), data); };
  const MinimizeResult m = nelder_mead(loss, x0, bounds, opts);

  FitResult r;
  for (const auto& p : params) r.names.push_back(p.name);
  r.params = m.x;
  r.residual_norm = m.loss;
  r.initial_loss = m.initial_loss;
  r.converged = m.converged;
  r.iterations = m.iterations;
  r.evaluations = m.evaluations;
  r.uncertainties = hessian_uncertainties(loss, m.x, m.loss, data.x.size(), data.sigma.has_value());
  return r;
}

FitResult fit_least_squares(const PointModel& model, const DataSeries& data,
                            std::span<const Parameter> params, const NelderMeadOptions& opts) {
  VectorModel vm = [&](std::span<const double> p) {
    std::vector<double> out(data.x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = model(data.x[i], p);
    return out;
  };
  return fit_least_squares(vm, data, params, opts);
}

// --- ZFS ------------------------------------------------------------------

namespace {

struct Peak {
  std::size_t index = 0;
  double height = 0.0;
};

// Local maxima of a lightly smoothed copy, tallest first.
std::vector<Peak> find_peaks(const std::vector<double>& s) {
  const std::size_t n = s.size();
  std::vector<double> sm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= 2 ? i - 2 : 0;
    const std::size_t b = std::min(n - 1, i + 2);
    double acc = 0.0;
    for (std::size_t k = a; k <= b; ++k) acc += s[k];
    sm[i] = acc / static_cast<double>(b - a + 1);
  }
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (sm[i] > sm[i - 1] && sm[i] >= sm[i + 1]) peaks.push_back({i, sm[i]});
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  return peaks;
}

// Full width at half maximum around `idx`, linearly interpolated.
double fwhm_at(const std::vector<double>& f, const std::vector<double>& s, std::size_t idx) {
  const double half = 0.5 * s[idx];
  std::size_t l = idx;
  while (l > 0 && s[l] > half) --l;
  std::size_t r = idx;
  while (r + 1 < s.size() && s[r] > half) ++r;
  auto cross = [&](std::size_t a, std::size_t b) {
    const double ds = s[b] - s[a];
    if (ds == 0.0) return f[a];
    return f[a] + (half - s[a]) * (f[b] - f[a]) / ds;
  };
  const double fl = l < idx ? cross(l, l + 1) : f[l];
  const double fr = r > idx ? cross(r - 1, r) : f[r];
  return fr - fl;
}

}  // namespace

ZfsGuess peak_init(const SpectrumGrid& spec) {
  require(spec.freqs.size() == spec.signal.size() && spec.freqs.size() >= 5,
          "peak_init: spectrum too short or inconsistent");
  std::vector<double> s = spec.signal;
  // Orient the spectrum so its dominant extremum is positive.
  const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
  if (std::abs(*mn) > std::abs(*mx))
    for (double& v : s) v = -v;

  std::vector<double> mags(s.size());
  std::transform(s.begin(), s.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2), mags.end());
  const double threshold = 3.0 * mags[mags.size() / 2];

  auto peaks = find_peaks(s);
  std::erase_if(peaks, [&](const Peak& p) { return p.height <= threshold; });
  require(!peaks.empty(), "peak_init: fewer than two peaks above threshold");

  // Exclude the hill of the tallest peak: walk outwards while descending.
  const Peak first = peaks.front();
  const std::size_t i0 = first.index;
  std::size_t l = i0, r = i0;
  const double half = 0.5 * first.height;
  while (l > 0 && (s[l - 1] <= s[l] || s[l - 1] > half)) --l;
  while (r + 1 < s.size() && (s[r + 1] <= s[r] || s[r + 1] > half)) ++r;
  const Peak* second = nullptr;
  for (const auto& p : peaks)
    if (p.index < l || p.index > r) {
      second = &p;
      break;
    }
  require(second != nullptr, "peak_init: fewer than two peaks above threshold");

  const Peak& lower = first.index < second->index ? first : *second;
  const Peak& upper = first.index < second->index ? *second : first;
  const double f1 = spec.freqs[lower.index];
  const double f2 = spec.freqs[upper.index];
  require(f2 > f1, "peak_init: degenerate peaks");

  ZfsGuess g;
  g.d = 0.5 * (f1 + f2);
  g.e = 0.5 * (f2 - f1);
  g.linewidth = fwhm_at(spec.freqs, s, first.index);
  if (!(g.linewidth > 0.0)) g.linewidth = 4.0 * (spec.freqs[1] - spec.freqs[0]);
  // A zero-field pair has powder-mean coupling weight 1/3.
  g.amp_yz = 3.0 * lower.height;
  g.amp_xz = 3.0 * upper.height;
  return g;
}

namespace {

FitResult fit_zfs_rows(const std::vector<const SpectrumGrid*>& rows, const std::vector<double>& fields,
                       const ZfsFitOptions& opts) {
  require(!rows.empty(), "fit_zfs: no spectra");
  const SpectrumGrid& ref = *rows.front();
  const ZfsGuess g = opts.init ? *opts.init : peak_init(ref);
  require(g.d > 0.0 && g.linewidth > 0.0, "fit_zfs: invalid initial guess");

  DataSeries data;
  std::vector<std::size_t> offsets;
  for (const auto* row : rows) {
    require(row->freqs.size() == row->signal.size() && !row->freqs.empty(), "fit_zfs: inconsistent spectrum");
    offsets.push_back(data.x.size());
    data.x.insert(data.x.end(), row->freqs.begin(), row->freqs.end());
    data.y.insert(data.y.end(), row->signal.begin(), row->signal.end());
  }
  // Rows are stacked; the abscissa is only used for bookkeeping here.
  std::vector<double> idx(data.x.size());
  std::iota(idx.begin(), idx.end(), 0.0);
  data.x = idx;

  const OrientationGrid orient = fibonacci_sphere(opts.n_orient);
  const double span = ref.freqs.back() - ref.freqs.front();
  const double df = ref.freqs.size() > 1 ? ref.freqs[1] - ref.freqs[0] : g.linewidth;
  const double amp_cap = 100.0 * std::max({g.amp_xz, g.amp_yz, 1e-300});

  const std::vector<Parameter> params{
      {"d", g.d, {0.5 * g.d, 2.0 * g.d}},
      {"e", g.e, {0.0, g.d}},
      {"linewidth", g.linewidth, {0.5 * df, std::max(span, g.linewidth)}},
      {"amp_xz", g.amp_xz, {0.0, amp_cap}},
      {"amp_yz", g.amp_yz, {0.0, amp_cap}},
  };

  VectorModel model = [&](std::span<const double> p) {
    ZfsParams z{p[0], p[1], p[3], p[4], opts.amp_xy};
    if (!(z.e <= z.d / 3.0)) return std::vector<double>{};  // outside the ZFS convention
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto sig = powder_signal(z, fields[r], rows[r]->freqs, p[2], orient, opts.threads);
      out.insert(out.end(), sig.begin(), sig.end());
    }
    return out;
  };
  return fit_least_squares(model, data, params, opts.optimizer);
}

}  // namespace

FitResult fit_zfs(const SpectrumGrid& spec, const ZfsFitOptions& opts) {
  return fit_zfs_rows({&spec}, {opts.b_mag}, opts);
}

FitResult fit_zfs(const OdmrMap& map, double b_max, const ZfsFitOptions& opts) {
  std::vector<SpectrumGrid> rows;
  std::vector<double> fields;
  for (std::size_t k = 0; k < map.b_values.size(); ++k) {
    if (std::abs(map.b_values[k]) > b_max) continue;
    rows.push_back({map.freqs, map.row(k), map.linewidth});
    fields.push_back(map.b_values[k]);
  }
  require(!rows.empty(), "fit_zfs: no map rows at or below the low-field limit");
  std::vector<const SpectrumGrid*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r);
  ZfsFitOptions o = opts;
  if (!o.init) {
    // Initialize from the lowest-field row.
    std::size_t k0 = 0;
    for (std::size_t k = 1; k < fields.size(); ++k)
      if (std::abs(fields[k]) < std::abs(fields[k0])) k0 = k;
    o.init = peak_init(rows[k0]);
  }
  return fit_zfs_rows(ptrs, fields, o);
}

// --- decays and scaling laws -------------------------------------------------

FitResult fit_stretched_exp(const DataSeries& data, const NelderMeadOptions& opts) {
  data.validate();
  require(data.x.size() >= 5, "fit_stretched_exp: need at least 5 points");
  const double y0 = data.y.front();
  const bool decaying = y0 > 0.0 && data.y.back() < y0;

  // T2 guess: first time the signal falls below y0/e.
  double t2 = data.x.back();
  for (std::size_t i = 1; i < data.x.size(); ++i) {
    if (data.y[i] <= y0 / std::exp(1.0)) {
      t2 = data.x[i];
      break;
    }
  }
  if (!(t2 > 0.0)) t2 = std::max(data.x.back(), 1e-30);
  const double amp0 = y0 > 0.0 ? y0 : std::max(1e-12, *std::max_element(data.y.begin(), data.y.end()));

  const std::vector<Parameter> params{
      {"amplitude", amp0, {0.0, kInf}},
      {"t2", t2, {1e-300, kInf}},
      {"beta", 1.0, {0.3, 3.0}},
  };
  PointModel model = [](double t, std::span<const double> p) {
    return p[0] * std::exp(-std::pow(t / p[1], p[2]));
  };
  FitResult r = fit_least_squares(model, data, params, opts);
  if (!decaying) r.converged = false;
  return r;
}

PowerLawFit fit_power_law(std::span<const double> n_values, std::span<const double> t2_values) {
  require(n_values.size() == t2_values.size(), "fit_power_law: length mismatch");
  require(n_values.size() >= 2, "fit_power_law: need at least two points");
  const std::size_t m = n_values.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(n_values[i] > 0.0 && t2_values[i] > 0.0 && std::isfinite(n_values[i]) &&
                std::isfinite(t2_values[i]),
            "fit_power_law: all values must be positive");
    lx[i] = std::log(n_values[i]);
    ly[i] = std::log(t2_values[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "fit_power_law: n values must not all be equal");
  PowerLawFit out;
  out.exponent = sxy / sxx;
  out.prefactor = std::exp(my - out.exponent * mx);
  if (m > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ly[i] - (my + out.exponent * (lx[i] - mx));
      rss += r * r;
    }
    out.exponent_sigma = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  return out;
}

FitResult fit_t1_temperature(std::span<const double> temps, std::span<const double> t1s,
                             std::span<const double> t1_sigma, const NelderMeadOptions& opts) {
  require(temps.size() == t1s.size() && temps.size() >= 2, "fit_t1_temperature: need >= 2 matched points");
  require(t1_sigma.empty() || t1_sigma.size() == t1s.size(), "fit_t1_temperature: sigma length mismatch");

  // Sort by temperature so the result does not depend on input order.
  std::vector<std::size_t> order(temps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return temps[a] < temps[b] || (temps[a] == temps[b] && t1s[a] < t1s[b]);
  });

  DataSeries data;
  data.x_unit = "K";
  data.y_unit = "1/s";
  if (!t1_sigma.empty()) data.sigma.emplace();
  for (std::size_t k : order) {
    require(temps[k] > 0.0 && t1s[k] > 0.0, "fit_t1_temperature: temperatures and T1 must be positive");
    data.x.push_back(temps[k]);
    data.y.push_back(1.0 / t1s[k]);
    if (data.sigma) data.sigma->push_back(t1_sigma[k] / (t1s[k] * t1s[k]));
  }

  // Start from the unconstrained linear solution, clipped to the bounds.
  Eigen::MatrixXd design(data.x.size(), 2);
  Eigen::VectorXd rhs(data.x.size());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double w = data.sigma ? 1.0 / (*data.sigma)[i] : 1.0;
    design(i, 0) = w * data.x[i];
    design(i, 1) = w * std::pow(data.x[i], 7);
    rhs(i) = w * data.y[i];
  }
  const Eigen::Vector2d lin = design.colPivHouseholderQr().solve(rhs);
  const double t_max = data.x.back();
  const double r_max = *std::max_element(data.y.begin(), data.y.end());
  const double a_scale = r_max / t_max;
  const double b_scale = r_max / std::pow(t_max, 7);
  const double a0 = std::isfinite(lin(0)) ? std::max(lin(0), 0.0) : a_scale;
  const double b0 = std::isfinite(lin(1)) ? std::max(lin(1), 0.0) : b_scale;

  NelderMeadOptions o = opts;
  if (o.steps.empty())
    o.steps = {a0 > 0.0 ? 0.05 * a0 : 0.05 * a_scale, b0 > 0.0 ? 0.05 * b0 : 0.05 * b_scale};
  const std::vector<Parameter> params{
      {"relax_a", a0, {0.0, kInf}},
      {"relax_raman", b0, {0.0, kInf}},
  };
  PointModel model = [](double t, std::span<const double> p) { return p[0] * t + p[1] * std::pow(t, 7); };
  return fit_least_squares(model, data, params, o);
}

FitResult fit_damped_cosine(std::span<const double> times, std::span<const double> signal,
                            const NelderMeadOptions& opts) {
  require(times.size() == signal.size() && times.size() >= 8, "fit_damped_cosine: need >= 8 points");
  DataSeries data;
  data.x.assign(times.begin(), times.end());
  data.y.assign(signal.begin(), signal.end());

  const std::size_t n = data.x.size();
  double tail = 0.0;
  for (std::size_t i = n / 2; i < n; ++i) tail += data.y[i];
  const double offset = tail / static_cast<double>(n - n / 2);

  // Frequency guess from the first maximum after the start.
  std::size_t peak = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (data.y[i] >= data.y[i - 1] && data.y[i] > data.y[i + 1]) {
      peak = i;
      break;
    }
  }
  const double t_peak = std::max(data.x[peak] - data.x.front(), data.x[1] - data.x[0]);
  const double freq = 0.5 / t_peak;
  const double duration = data.x.back() - data.x.front();
  const double amp = std::max(std::abs(data.y[peak] - offset), 1e-12);

  const std::vector<Parameter> params{
      {"offset", offset, {-kInf, kInf}},
      {"amplitude", amp, {0.0, kInf}},
      {"rate", 3.0 / duration, {0.0, kInf}},
      {"freq", freq, {0.0, kInf}},
  };
  PointModel model = [](double t, std::span<const double> p) {
    return p[0] - p[1] * std::exp(-p[2] * t) * std::cos(2.0 * 3.14159265358979323846 * p[3] * t);
  };
  return fit_least_squares(model, data, params, opts);
}

}  // namespace fpq
