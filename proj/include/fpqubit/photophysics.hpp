#pragma once

// Rate-equation model of the singlet / triplet manifolds under 488 nm
// initialization, microwave population swaps and 912 nm triggered delayed
// fluorescence (OADF) readout.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fpqubit/spinham.hpp"

namespace fpq {

enum class PhotoState : std::size_t { S0, S1, T1x, T1y, T1z, T2x, T2y, T2z };
inline constexpr std::size_t kPhotoStates = 8;

const char* to_string(PhotoState s);
PhotoState t1_state(Sublevel s);
PhotoState t2_state(Sublevel s);

struct PhotophysicsParams {
  double k_exc = 0.0;         // S0 -> S1 under 488 nm, 1/s
  double k_fl = 0.0;          // S1 -> S0 total decay, 1/s
  double q_r = 1.0;           // radiative fraction of k_fl
  std::array<double, 3> k_isc{};   // S1 -> T1{x,y,z}, 1/s
  double k_pump912 = 0.0;     // T1i -> T2i under 912 nm, 1/s
  std::array<double, 3> k_risc{};  // T2{x,y,z} -> S1, 1/s
  double k_t2_relax = 0.0;    // T2i -> T1i, 1/s
  double k_trip_decay = 0.0;  // T1i -> S0, 1/s
  double k_spin_relax = 0.0;  // between every pair of T1 sublevels, 1/s
  std::optional<std::array<double, 3>> k_trip_decay_sublevel;  // overrides k_trip_decay

  void validate() const;
};

using Generator = Eigen::Matrix<double, 8, 8>;
using Populations = Eigen::Matrix<double, 8, 1>;

/// Generator plus the photon-emission coefficient q_r * k_fl applied to p_S1.
struct RateModel {
  Generator generator = Generator::Zero();
  double emission_coeff = 0.0;
};

/// Column-stochastic generator: entry (to, from) is the channel rate and the
/// diagonal is minus the column sum. Laser-gated channels vanish when off.
RateModel build_rate_matrix(const PhotophysicsParams& p, bool laser488, bool laser912);

/// exp(A) by scaling and squaring with an order-6 Taylor core.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

struct Propagation {
  Populations pop = Populations::Zero();
  double emission = 0.0;  // photons emitted during the interval
};

/// pop' = exp(G t) pop; emission integrated through an augmented
/// photon-counting state.
Propagation propagate(const Populations& pop, const RateModel& model, double duration);

/// Exchanges fraction f of the populations of two T1 sublevels.
Populations apply_mw_pulse(const Populations& pop, PairLabel pair, double fraction);

struct MicrowaveEvent {
  PairLabel pair = PairLabel::xz;
  double fraction = 1.0;
};

/// One timed block. Microwave events fire at the start of the block.
struct Segment {
  double duration = 0.0;  // s
  bool laser488 = false;
  bool laser912 = false;
  std::vector<MicrowaveEvent> microwave;
};

struct PulseSequence {
  std::vector<Segment> segments;
  void validate() const;
  double total_duration() const;
};

struct Window {
  double start = 0.0;
  double end = 0.0;
};

struct PopulationTrace {
  std::vector<double> times;
  std::vector<Populations> populations;
  std::vector<double> emission_rate;  // photons/s at each sample
  std::vector<double> oadf_counts;    // per readout window
  double total_oadf = 0.0;

  std::vector<double> population_of(PhotoState s) const;
};

struct RunOptions {
  std::size_t samples_per_segment = 1000;
  // Empty: every 912-on segment plus a 10 us tail.
  std::vector<Window> windows;
  std::optional<Populations> initial;  // default: everything in S0
};

PopulationTrace run_sequence(const PulseSequence& seq, const PhotophysicsParams& p,
                             const RunOptions& opts = {});

/// Default readout windows for a sequence.
std::vector<Window> default_readout_windows(const PulseSequence& seq, double tail = 10e-6);

/// (counts with the microwave slot applied - counts without) / counts without,
/// over the OADF windows. The template must hold microwave events on `pair`.
double oadf_contrast(const PhotophysicsParams& p, PairLabel pair, const PulseSequence& seq_template,
                     const RunOptions& opts = {});

/// Timings of the standard init / wait / microwave / readout sequence.
struct OadfTiming {
  double t_init = 100e-6;     // 488 on
  double t_wait = 1e-6;       // dark, before the microwave slot
  double t_mw_gap = 1e-6;     // dark, starts with the microwave event
  double t_read = 2e-6;       // 912 on
  double t_tail = 10e-6;      // dark after readout
};

PulseSequence standard_oadf_sequence(const OadfTiming& timing, PairLabel pair, double fraction = 1.0);

/// Named calibration preset: rates plus sequence timing.
struct PhotophysicsPreset {
  std::string name;
  PhotophysicsParams params;
  OadfTiming timing;
};

/// "cryo-80K" or "ambient". Values are calibrations, not measurements.
PhotophysicsPreset photophysics_preset(const std::string& name);
std::vector<std::string> photophysics_preset_names();

}  // namespace fpq
