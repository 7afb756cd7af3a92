#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fpqubit/cli/commands.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/fitting.hpp"
#include "fpqubit/powder.hpp"

namespace fpq::cli {

namespace {

// Local maxima at or above `fraction` of the row maximum.
std::vector<double> find_peaks(const std::vector<double>& freqs, const std::vector<double>& row, double fraction) {
  std::vector<double> out;
  double top = 0.0;
  for (double v : row) top = std::max(top, v);
  if (!(top > 0.0)) return out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const bool left = i == 0 || row[i] > row[i - 1];
    const bool right = i + 1 == row.size() || row[i] >= row[i + 1];
    if (left && right && row[i] >= fraction * top) out.push_back(freqs[i]);
  }
  return out;
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out(v);
  for (auto& x : out) x *= s;
  return out;
}

}  // namespace

ZfsParams zfs_from_config(const Config& cfg) {
  ZfsParams z;
  z.d = cfg.number("zfs", "d");
  z.e = cfg.number("zfs", "e");
  z.amp_xz = cfg.number_or("zfs", "amp_xz", 1.0);
  z.amp_yz = cfg.number_or("zfs", "amp_yz", 1.0);
  z.amp_xy = cfg.number_or("zfs", "amp_xy", 0.0);
  z.validate();
  return z;
}

CommandResult cmd_simulate_odmr(const Config& cfg, const Options& opt) {
  const ZfsParams zfs = zfs_from_config(cfg);
  const double linewidth = cfg.number("spectrum", "linewidth");
  const double f_start = cfg.number("spectrum", "f_start");
  const double f_stop = cfg.number("spectrum", "f_stop");
  const double f_step = cfg.number("spectrum", "f_step");
  require(f_step > 0.0 && f_stop > f_start, "spectrum: empty frequency grid (need f_stop > f_start, f_step > 0)");
  const FrequencyGrid grid = FrequencyGrid::span(f_start, f_stop, f_step);
  require(grid.count >= 2, "spectrum: empty frequency grid");
  const std::vector<double> fields = cfg.list_or("spectrum", "fields", {0.0});
  const std::size_t n_orient = cfg.count_or("spectrum", "n_orient", 10000);
  const double noise = cfg.number_or("spectrum", "noise", 0.0);
  require(noise >= 0.0, "spectrum.noise must be >= 0");

  const OdmrMap map = synth_odmr_map(zfs, fields, grid, linewidth, PowderOptions{n_orient, opt.threads});
  const std::size_t nf = map.freqs.size();

  std::vector<double> signal = map.signal;
  double noise_sigma = 0.0;
  if (noise > 0.0) {
    double top = 0.0;
    for (double v : signal) top = std::max(top, std::abs(v));
    noise_sigma = noise * top;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : signal) v += noise_sigma * gauss(rng);
  }

  CommandResult r;
  r.envelope.command = "simulate-odmr";
  nlohmann::json rows = nlohmann::json::array();
  Column c_field{"field_t", {}}, c_freq{"freq_hz", {}}, c_sig{"signal", {}};
  for (std::size_t b = 0; b < fields.size(); ++b) {
    const std::vector<double> model_row = map.row(b);
    double top = 0.0;
    for (double v : model_row) top = std::max(top, v);
    rows.push_back({{"field_t", fields[b]}, {"peaks_hz", find_peaks(map.freqs, model_row, 0.25)}, {"max_signal", top}});
    for (std::size_t i = 0; i < nf; ++i) {
      c_field.values.push_back(fields[b]);
      c_freq.values.push_back(map.freqs[i]);
      c_sig.values.push_back(signal[b * nf + i]);
    }
    r.plot.series.push_back({"B = " + std::to_string(fields[b] * 1e3).substr(0, 6) + " mT", scaled(map.freqs, 1e-9),
                             std::vector<double>(signal.begin() + b * nf, signal.begin() + (b + 1) * nf)});
  }
  r.envelope.payload = {{"n_orient", n_orient},
                        {"linewidth_hz", linewidth},
                        {"grid", {{"start_hz", grid.start}, {"step_hz", grid.step}, {"count", grid.count}}},
                        {"zfs", {{"d_hz", zfs.d}, {"e_hz", zfs.e}, {"amp_xz", zfs.amp_xz}, {"amp_yz", zfs.amp_yz},
                                 {"amp_xy", zfs.amp_xy}}},
                        {"noise_sigma", noise_sigma},
                        {"rows", rows}};
  if (noise > 0.0) r.envelope.payload["seed"] = opt.seed;
  r.envelope.notes = {"Powder average over a Fibonacci orientation lattice; Gaussian lines of the given FWHM.",
                      "peaks_hz are local maxima of the noiseless model at >= 25% of the row maximum."};
  r.series = {c_field, c_freq, c_sig};
  r.plot.title = "Powder ODMR spectrum";
  r.plot.x_label = "frequency (GHz)";
  r.plot.y_label = "signal";
  return r;
}

CommandResult cmd_fit_zfs(const Config& cfg, const Options& opt) {
  if (!opt.data) throw ValidationError("fit-zfs: --data is required");
  const auto cols = read_csv(*opt.data, kSpectrumColumns);
  const auto& field = cols[0].values;
  const auto& freq = cols[1].values;
  const auto& sig = cols[2].values;

  // Rows grouped by field, in order of first appearance.
  std::vector<double> b_values;
  std::vector<std::vector<double>> row_freqs, row_sig;
  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < field.size(); ++i) {
    auto it = index.find(field[i]);
    if (it == index.end()) {
      it = index.emplace(field[i], b_values.size()).first;
      b_values.push_back(field[i]);
      row_freqs.emplace_back();
      row_sig.emplace_back();
    }
    row_freqs[it->second].push_back(freq[i]);
    row_sig[it->second].push_back(sig[i]);
  }
  for (std::size_t b = 0; b < b_values.size(); ++b) {
    require(row_freqs[b].size() >= 8, "fit-zfs: each field needs at least 8 frequency points");
    require(row_freqs[b] == row_freqs[0], "fit-zfs: all fields must share one frequency grid");
    for (std::size_t i = 1; i < row_freqs[b].size(); ++i)
      require(row_freqs[b][i] > row_freqs[b][i - 1], "fit-zfs: frequencies must be strictly ascending per field");
  }

  const double b_max = cfg.number_or("fit", "b_max", 5e-3);
  ZfsFitOptions fo;
  fo.n_orient = cfg.count_or("fit", "n_orient", 2000);
  fo.threads = opt.threads;
  fo.amp_xy = cfg.number_or("zfs", "amp_xy", 0.0);
  if (cfg.has("fit", "max_evaluations"))
    fo.optimizer.max_evaluations = static_cast<int>(cfg.count("fit", "max_evaluations"));

  // Lowest-field row seeds the peak-based guess.
  std::size_t seed_row = 0;
  for (std::size_t b = 1; b < b_values.size(); ++b)
    if (std::abs(b_values[b]) < std::abs(b_values[seed_row])) seed_row = b;
  SpectrumGrid seed_spec{row_freqs[seed_row], row_sig[seed_row], 0.0};

  std::map<std::string, double> overrides;
  for (const auto& e : opt.init) {
    auto [k, v] = parse_init_entry(e);
    overrides[k] = v;
  }
  std::string init_source = "peak_init";
  ZfsGuess guess;
  if (overrides.size() == 5) {
    init_source = "--init";
  } else {
    guess = peak_init(seed_spec);
    if (!overrides.empty()) init_source = "peak_init+--init";
  }
  for (const auto& [k, v] : overrides) {
    if (k == "d") guess.d = v;
    if (k == "e") guess.e = v;
    if (k == "linewidth") guess.linewidth = v;
    if (k == "amp_xz") guess.amp_xz = v;
    if (k == "amp_yz") guess.amp_yz = v;
  }
  fo.init = guess;

  FitResult fit;
  std::vector<std::size_t> used;
  if (b_values.size() == 1) {
    fo.b_mag = std::abs(b_values[0]);
    fit = fit_zfs(SpectrumGrid{row_freqs[0], row_sig[0], 0.0}, fo);
    used.push_back(0);
  } else {
    OdmrMap map;
    map.b_values = b_values;
    map.freqs = row_freqs[0];
    for (std::size_t b = 0; b < b_values.size(); ++b) {
      map.signal.insert(map.signal.end(), row_sig[b].begin(), row_sig[b].end());
      if (std::abs(b_values[b]) <= b_max) used.push_back(b);
    }
    fit = fit_zfs(map, b_max, fo);
  }

  ZfsParams best;
  best.d = fit.value("d");
  best.e = fit.value("e");
  best.amp_xz = fit.value("amp_xz");
  best.amp_yz = fit.value("amp_yz");
  best.amp_xy = fo.amp_xy;
  const double lw = fit.value("linewidth");
  const OrientationGrid grid = fibonacci_sphere(fo.n_orient);

  CommandResult r;
  r.envelope.command = "fit-zfs";
  Column c_field{"field_t", {}}, c_freq{"freq_hz", {}}, c_sig{"signal", {}}, c_model{"model", {}};
  for (std::size_t b : used) {
    const auto model = powder_signal(best, std::abs(b_values[b]), row_freqs[b], lw, grid, opt.threads);
    for (std::size_t i = 0; i < model.size(); ++i) {
      c_field.values.push_back(b_values[b]);
      c_freq.values.push_back(row_freqs[b][i]);
      c_sig.values.push_back(row_sig[b][i]);
      c_model.values.push_back(model[i]);
    }
    r.plot.series.push_back({"data " + std::to_string(b), scaled(row_freqs[b], 1e-9), row_sig[b]});
    r.plot.series.push_back({"model " + std::to_string(b), scaled(row_freqs[b], 1e-9), model});
  }

  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    params[fit.names[i]] = {{"value", fit.params[i]}, {"sigma", fit.uncertainties[i]}};
  std::vector<double> used_fields;
  for (std::size_t b : used) used_fields.push_back(b_values[b]);
  r.envelope.payload = {{"params", params},
                        {"units", {{"d", "Hz"}, {"e", "Hz"}, {"linewidth", "Hz"}, {"amp_xz", "1"}, {"amp_yz", "1"}}},
                        {"residual_norm", fit.residual_norm},
                        {"initial_loss", fit.initial_loss},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations},
                        {"evaluations", fit.evaluations},
                        {"n_orient", fo.n_orient},
                        {"fields_used_t", used_fields},
                        {"init_source", init_source},
                        {"init", {{"d", guess.d}, {"e", guess.e}, {"linewidth", guess.linewidth},
                                  {"amp_xz", guess.amp_xz}, {"amp_yz", guess.amp_yz}}}};
  r.envelope.notes = {"Bounded Nelder-Mead least squares of the powder model; amp_xy held fixed.",
                      "Uncertainties from a central-difference Hessian of the loss, scaled by loss/(n-p)."};
  r.series = {c_field, c_freq, c_sig, c_model};
  r.plot.title = "ZFS fit";
  r.plot.x_label = "frequency (GHz)";
  r.plot.y_label = "signal";
  return r;
}

}  // namespace fpq::cli
