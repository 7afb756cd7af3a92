#include <algorithm>
#include <cmath>

#include "fpqubit/cli/commands.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/photophysics.hpp"

namespace fpq::cli {

namespace {

void override_rate(const Config& cfg, const char* key, double& slot) {
  if (cfg.has("photophysics", key)) slot = cfg.number("photophysics", key);
}

}  // namespace

CommandResult cmd_oadf(const Config& cfg, const Options&) {
  const std::string preset_name = cfg.text_or("photophysics", "preset", "cryo-80K");
  PhotophysicsPreset preset = photophysics_preset(preset_name);
  PhotophysicsParams& p = preset.params;
  override_rate(cfg, "k_exc", p.k_exc);
  override_rate(cfg, "k_fl", p.k_fl);
  override_rate(cfg, "q_r", p.q_r);
  override_rate(cfg, "k_isc_x", p.k_isc[0]);
  override_rate(cfg, "k_isc_y", p.k_isc[1]);
  override_rate(cfg, "k_isc_z", p.k_isc[2]);
  override_rate(cfg, "k_pump912", p.k_pump912);
  override_rate(cfg, "k_risc_x", p.k_risc[0]);
  override_rate(cfg, "k_risc_y", p.k_risc[1]);
  override_rate(cfg, "k_risc_z", p.k_risc[2]);
  override_rate(cfg, "k_t2_relax", p.k_t2_relax);
  override_rate(cfg, "k_trip_decay", p.k_trip_decay);
  override_rate(cfg, "k_spin_relax", p.k_spin_relax);
  p.validate();

  OadfTiming& t = preset.timing;
  override_rate(cfg, "t_init", t.t_init);
  override_rate(cfg, "t_wait", t.t_wait);
  override_rate(cfg, "t_mw_gap", t.t_mw_gap);
  override_rate(cfg, "t_read", t.t_read);
  override_rate(cfg, "t_tail", t.t_tail);
  const double fraction = cfg.number_or("photophysics", "mw_fraction", 1.0);
  RunOptions ro;
  ro.samples_per_segment = cfg.count_or("photophysics", "samples_per_segment", 1000);

  CommandResult r;
  r.envelope.command = "oadf";
  nlohmann::json contrast = nlohmann::json::object();
  for (PairLabel pair : {PairLabel::xz, PairLabel::yz}) {
    const PulseSequence seq = standard_oadf_sequence(t, pair, fraction);
    contrast[to_string(pair)] = oadf_contrast(p, pair, seq, ro);
  }

  // Full trace for the xz pair with and without the microwave swap.
  const PulseSequence seq_pi = standard_oadf_sequence(t, PairLabel::xz, fraction);
  const PulseSequence seq_ref = standard_oadf_sequence(t, PairLabel::xz, 0.0);
  const PopulationTrace tr = run_sequence(seq_pi, p, ro);
  const PopulationTrace ref = run_sequence(seq_ref, p, ro);

  double max_err = 0.0, min_pop = 0.0;
  for (const auto* trace : {&tr, &ref}) {
    for (const auto& pop : trace->populations) {
      max_err = std::max(max_err, std::abs(pop.sum() - 1.0));
      min_pop = std::min(min_pop, pop.minCoeff());
    }
  }

  std::vector<Column> cols{{"time_s", tr.times}};
  for (std::size_t s = 0; s < kPhotoStates; ++s)
    cols.push_back({std::string("p_") + to_string(static_cast<PhotoState>(s)),
                    tr.population_of(static_cast<PhotoState>(s))});
  cols.push_back({"emission_pi_per_s", tr.emission_rate});
  cols.push_back({"emission_ref_per_s", ref.emission_rate});

  r.envelope.payload = {
      {"preset", preset_name},
      {"contrast", contrast},
      {"oadf_counts_pi", tr.total_oadf},
      {"oadf_counts_ref", ref.total_oadf},
      {"max_population_error", max_err},
      {"min_population", min_pop},
      {"mw_fraction", fraction},
      {"timing_s", {{"t_init", t.t_init}, {"t_wait", t.t_wait}, {"t_mw_gap", t.t_mw_gap}, {"t_read", t.t_read},
                    {"t_tail", t.t_tail}}},
      {"rates_per_s", {{"k_exc", p.k_exc}, {"k_fl", p.k_fl}, {"q_r", p.q_r}, {"k_isc", p.k_isc},
                       {"k_pump912", p.k_pump912}, {"k_risc", p.k_risc}, {"k_t2_relax", p.k_t2_relax},
                       {"k_trip_decay", p.k_trip_decay}, {"k_spin_relax", p.k_spin_relax}}}};
  r.envelope.notes = {"Contrast = (counts with swap - counts without) / counts without, over the 912 nm window plus tail.",
                      "Preset rates are calibrations chosen to reproduce target contrasts, not measured constants."};
  r.series = cols;

  // Only the readout part of the trace is informative on a linear time axis.
  const double t_read0 = t.t_init + t.t_wait + t.t_mw_gap;
  PlotSeries pi_s{"with swap", {}, {}}, ref_s{"reference", {}, {}};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] < t_read0) continue;
    pi_s.x.push_back((tr.times[i] - t_read0) * 1e6);
    pi_s.y.push_back(tr.emission_rate[i]);
    ref_s.x.push_back((ref.times[i] - t_read0) * 1e6);
    ref_s.y.push_back(ref.emission_rate[i]);
  }
  r.plot.title = "OADF readout transient";
  r.plot.x_label = "time after 912 nm onset (us)";
  r.plot.y_label = "emission (photons/s)";
  r.plot.series = {pi_s, ref_s};
  return r;
}

}  // namespace fpq::cli
