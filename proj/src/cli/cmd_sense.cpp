#include <algorithm>
#include <cmath>

#include "fpqubit/cli/commands.hpp"
#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/sensing.hpp"

namespace fpq::cli {

CommandResult cmd_sense(const Config& cfg, const Options& opt) {
  const ZfsParams zfs = zfs_from_config(cfg);
  const double bias = cfg.number("sensing", "bias");
  const double linewidth = cfg.number("sensing", "linewidth");
  const std::size_t n_orient = cfg.count_or("sensing", "n_orient", 2000);
  const double f_center = cfg.number_or("sensing", "f_center", zfs.d + zfs.e);
  const double f_min = cfg.number("sensing", "f_min");
  const double f_max = cfg.number("sensing", "f_max");
  const double f_step = cfg.number("sensing", "f_step");
  const double delta = cfg.number_or("sensing", "delta", 10e-6);

  const FieldSpectrumModel model = powder_model(zfs, linewidth, n_orient, opt.threads);
  const TwoPointScheme scheme = choose_two_point_scheme(model, bias, f_center, f_min, f_max, f_step, delta);
  const SlopeResult at_zero = two_point_slope(model, 0.0, scheme.f_low, scheme.f_high, delta);
  const SlopeResult at_bias = two_point_slope(model, bias, scheme.f_low, scheme.f_high, delta);

  SensorBudget budget;
  budget.contrast = cfg.number("sensing", "contrast");
  budget.photons_per_shot = cfg.number("sensing", "photons_per_shot");
  budget.molecules = cfg.number_or("sensing", "molecules", 1.0);
  budget.overhead = cfg.number_or("sensing", "overhead", 1.0);
  budget.t_init = cfg.number("sensing", "t_init");
  budget.t_read = cfg.number("sensing", "t_read");
  budget.t_evolve = cfg.number("sensing", "t_evolve");
  const Sensitivity dc = dc_sensitivity(budget, scheme);

  const double r_dip = cfg.number_or("sensing", "dipole_distance", 5e-9);
  const double moment = cfg.number_or("sensing", "proton_moment", constants::proton_moment);
  const double b_dip = dipole_field(r_dip, moment, true);
  const double polarization = cfg.number_or("sensing", "polarization", 1.0);
  const double b_proton = cfg.number_or("sensing", "field_per_proton", b_dip);

  nlohmann::json payload = {
      {"scheme", {{"f_low_hz", scheme.f_low}, {"f_high_hz", scheme.f_high}, {"bias_field_t", bias},
                  {"normalized_slope_per_t", scheme.slope}}},
      {"slope_at_zero_field", {{"raw_slope_per_t", at_zero.slope}, {"zero", at_zero.zero}}},
      {"slope_at_bias", {{"raw_slope_per_t", at_bias.slope}, {"zero", at_bias.zero}}},
      {"budget", {{"contrast", budget.contrast}, {"photons_per_shot", budget.photons_per_shot},
                  {"molecules", budget.molecules}, {"overhead", budget.overhead}, {"t_shot_s", budget.t_shot()}}},
      {"dc", {{"eta_t_per_rthz", dc.eta}, {"eta_molar_t_mol_half_per_rthz", dc.eta_molar},
              {"proton_sensitivity_mol_per_hz", proton_number_sensitivity(dc.eta_molar, polarization, b_proton)}}},
      {"dipole", {{"distance_m", r_dip}, {"moment_j_per_t", moment}, {"axial_field_t", b_dip},
                  {"equatorial_field_t", dipole_field(r_dip, moment, false)}}},
      {"polarization", polarization},
      {"field_per_proton_t", b_proton}};

  if (cfg.has("sensing", "t2")) {
    SensorBudget ac_budget = budget;
    ac_budget.contrast = cfg.number_or("sensing", "ac_contrast", budget.contrast);
    const Sensitivity ac = ac_sensitivity(ac_budget, cfg.number("sensing", "t2"));
    payload["ac"] = {{"t2_s", cfg.number("sensing", "t2")},
                     {"contrast", ac_budget.contrast},
                     {"eta_t_per_rthz", ac.eta},
                     {"eta_molar_t_mol_half_per_rthz", ac.eta_molar},
                     {"proton_sensitivity_mol_per_hz", proton_number_sensitivity(ac.eta_molar, polarization, b_proton)}};
  }

  CommandResult r;
  r.envelope.command = "sense";
  r.envelope.payload = payload;
  r.envelope.notes = {
      "Shot-noise estimators: DC sigma_B = sqrt(2n)/(n |C slope|); AC eta = sqrt(t_shot)/(2 pi gamma C t_evolve sqrt(n)).",
      "Photon budget values are assumptions supplied by the config; results compare in order of magnitude only.",
      "Proton sensitivity = (1/p) (eta_molar / B_proton)^2, moles of protons per Hz."};

  Column c_f{"freq_hz", {}}, c_s{"signal", {}}, c_d{"dsignal_dfield_per_t", {}};
  for (double f = f_min; f <= f_max; f += f_step) c_f.values.push_back(f);
  c_s.values = model(bias, c_f.values);
  const auto up = model(bias + delta, c_f.values);
  const auto down = model(bias - delta, c_f.values);
  for (std::size_t i = 0; i < up.size(); ++i) c_d.values.push_back((up[i] - down[i]) / (2.0 * delta));
  r.series = {c_f, c_s, c_d};
  std::vector<double> f_ghz(c_f.values);
  for (auto& f : f_ghz) f *= 1e-9;
  r.plot.title = "Spectrum at the bias field";
  r.plot.x_label = "frequency (GHz)";
  r.plot.y_label = "signal";
  r.plot.series = {{"signal", f_ghz, c_s.values}};
  return r;
}

}  // namespace fpq::cli
