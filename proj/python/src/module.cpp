#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fpqubit/cli/commands.hpp"
#include "fpqubit/coherence.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/fitting.hpp"
#include "fpqubit/photophysics.hpp"
#include "fpqubit/powder.hpp"
#include "fpqubit/sensing.hpp"
#include "fpqubit/spinham.hpp"

namespace py = pybind11;
using namespace fpq;

namespace {

PairLabel parse_pair(const std::string& s) {
  if (s == "yz") return PairLabel::yz;
  if (s == "xz") return PairLabel::xz;
  if (s == "xy") return PairLabel::xy;
  throw ValidationError("pair must be one of yz, xz, xy");
}

py::dict fit_dict(const FitResult& r) {
  py::dict params;
  for (std::size_t i = 0; i < r.names.size(); ++i) params[py::str(r.names[i])] = py::make_tuple(r.params[i], r.uncertainties[i]);
  py::dict out;
  out["params"] = params;
  out["residual_norm"] = r.residual_norm;
  out["converged"] = r.converged;
  out["iterations"] = r.iterations;
  out["evaluations"] = r.evaluations;
  return out;
}

NoisePsd make_psd(double gamma_psd, double amplitude, std::optional<double> low, std::optional<double> high) {
  NoisePsd p;
  p.gamma_psd = gamma_psd;
  p.amplitude = amplitude;
  p.low_cutoff = low;
  p.high_cutoff = high;
  return p;
}

PhotophysicsPreset preset_with(const std::string& name, const py::dict& overrides) {
  PhotophysicsPreset preset = photophysics_preset(name);
  PhotophysicsParams& p = preset.params;
  for (const auto& [key, value] : overrides) {
    const std::string k = py::cast<std::string>(key);
    const double v = py::cast<double>(value);
    if (k == "k_exc") p.k_exc = v;
    else if (k == "k_fl") p.k_fl = v;
    else if (k == "q_r") p.q_r = v;
    else if (k == "k_isc_x") p.k_isc[0] = v;
    else if (k == "k_isc_y") p.k_isc[1] = v;
    else if (k == "k_isc_z") p.k_isc[2] = v;
    else if (k == "k_pump912") p.k_pump912 = v;
    else if (k == "k_risc_x") p.k_risc[0] = v;
    else if (k == "k_risc_y") p.k_risc[1] = v;
    else if (k == "k_risc_z") p.k_risc[2] = v;
    else if (k == "k_t2_relax") p.k_t2_relax = v;
    else if (k == "k_trip_decay") p.k_trip_decay = v;
    else if (k == "k_spin_relax") p.k_spin_relax = v;
    else throw ValidationError("unknown rate '" + k + "'");
  }
  p.validate();
  return preset;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spin-1 molecular qubit workbench";
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<ZfsParams>(m, "ZfsParams")
      .def(py::init([](double d, double e, double amp_xz, double amp_yz, double amp_xy) {
             ZfsParams z{d, e, amp_xz, amp_yz, amp_xy};
             z.validate();
             return z;
           }),
           py::arg("d"), py::arg("e"), py::arg("amp_xz") = 1.0, py::arg("amp_yz") = 1.0, py::arg("amp_xy") = 0.0)
      .def_readwrite("d", &ZfsParams::d)
      .def_readwrite("e", &ZfsParams::e)
      .def_readwrite("amp_xz", &ZfsParams::amp_xz)
      .def_readwrite("amp_yz", &ZfsParams::amp_yz)
      .def_readwrite("amp_xy", &ZfsParams::amp_xy)
      .def("__repr__", [](const ZfsParams& z) {
        return "ZfsParams(d=" + std::to_string(z.d) + ", e=" + std::to_string(z.e) + ")";
      });

  m.def("hamiltonian", [](const ZfsParams& z, const Vector3& b) { return build_hamiltonian(z, {b.x(), b.y(), b.z()}); },
        py::arg("zfs"), py::arg("field"), "3x3 Hamiltonian in Hz for a field vector in T.");
  m.def(
      "levels",
      [](const ZfsParams& z, const Vector3& b) {
        const auto lv = eigensolve(build_hamiltonian(z, {b.x(), b.y(), b.z()}));
        return py::make_tuple(std::vector<double>(lv.levels.begin(), lv.levels.end()), Eigen::Matrix3cd(lv.states));
      },
      py::arg("zfs"), py::arg("field"), "Ascending levels (Hz) and eigenvectors as columns.");
  m.def(
      "transitions",
      [](const ZfsParams& z, const Vector3& b, const Vector3& drive_axis) {
        const auto lv = eigensolve(build_hamiltonian(z, {b.x(), b.y(), b.z()}));
        py::list out;
        for (const auto& t : transition_table(lv, drive_axis).entries) {
          py::dict d;
          d["lower"] = t.lower;
          d["upper"] = t.upper;
          d["frequency"] = t.frequency;
          d["weight"] = t.weight;
          d["label"] = to_string(pair_label(t.lower, t.upper, z.e));
          out.append(d);
        }
        return out;
      },
      py::arg("zfs"), py::arg("field"), py::arg("drive_axis"));

  m.def(
      "fibonacci_sphere",
      [](std::size_t n) {
        const auto g = fibonacci_sphere(n);
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> out(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = g.points[i].transpose();
        return out;
      },
      py::arg("n"));
  m.def(
      "synth_spectrum",
      [](const ZfsParams& z, double b_mag, double f_start, double f_stop, double f_step, double linewidth,
         std::size_t n_orient, unsigned threads) {
        const auto s = synth_spectrum(z, b_mag, FrequencyGrid::span(f_start, f_stop, f_step), linewidth,
                                      PowderOptions{n_orient, threads});
        return py::make_tuple(s.freqs, s.signal);
      },
      py::arg("zfs"), py::arg("b_mag"), py::arg("f_start"), py::arg("f_stop"), py::arg("f_step"), py::arg("linewidth"),
      py::arg("n_orient") = 10000, py::arg("threads") = 1, "Powder spectrum; returns (freqs, signal).");
  m.def(
      "powder_signal",
      [](const ZfsParams& z, double b_mag, const std::vector<double>& freqs, double linewidth, std::size_t n_orient,
         unsigned threads) { return powder_signal(z, b_mag, freqs, linewidth, fibonacci_sphere(n_orient), threads); },
      py::arg("zfs"), py::arg("b_mag"), py::arg("freqs"), py::arg("linewidth"), py::arg("n_orient") = 10000,
      py::arg("threads") = 1);
  m.def(
      "ensemble_rabi",
      [](const ZfsParams& z, double b_mag, double drive, double b1, const std::vector<double>& times,
         std::size_t n_orient, double capture_factor, unsigned threads) {
        return ensemble_rabi(z, b_mag, drive, b1, times, n_orient, RabiOptions{capture_factor, threads}).signal;
      },
      py::arg("zfs"), py::arg("b_mag"), py::arg("drive"), py::arg("b1"), py::arg("times"), py::arg("n_orient") = 10000,
      py::arg("capture_factor") = 5.0, py::arg("threads") = 1);

  m.def(
      "peak_init",
      [](const std::vector<double>& freqs, const std::vector<double>& signal) {
        const auto g = peak_init(SpectrumGrid{freqs, signal, 0.0});
        py::dict d;
        d["d"] = g.d;
        d["e"] = g.e;
        d["linewidth"] = g.linewidth;
        d["amp_xz"] = g.amp_xz;
        d["amp_yz"] = g.amp_yz;
        return d;
      },
      py::arg("freqs"), py::arg("signal"));
  m.def(
      "fit_zfs",
      [](const std::vector<double>& freqs, const std::vector<double>& signal, double b_mag, std::size_t n_orient,
         unsigned threads, std::optional<py::dict> init) {
        ZfsFitOptions o;
        o.b_mag = b_mag;
        o.n_orient = n_orient;
        o.threads = threads;
        if (init) {
          const auto g = peak_init(SpectrumGrid{freqs, signal, 0.0});
          ZfsGuess guess = g;
          for (const auto& [key, value] : *init) {
            const std::string k = py::cast<std::string>(key);
            const double v = py::cast<double>(value);
            if (k == "d") guess.d = v;
            else if (k == "e") guess.e = v;
            else if (k == "linewidth") guess.linewidth = v;
            else if (k == "amp_xz") guess.amp_xz = v;
            else if (k == "amp_yz") guess.amp_yz = v;
            else throw ValidationError("unknown init key '" + k + "'");
          }
          o.init = guess;
        }
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit_zfs(SpectrumGrid{freqs, signal, 0.0}, o);
        }
        return fit_dict(r);
      },
      py::arg("freqs"), py::arg("signal"), py::arg("b_mag") = 0.0, py::arg("n_orient") = 2000, py::arg("threads") = 1,
      py::arg("init") = py::none(), "Powder fit of d, e, linewidth, amp_xz, amp_yz; params map to (value, sigma).");

  m.def("clock_gamma_eff", &clock_gamma_eff, py::arg("b_z"), py::arg("e"));
  m.def(
      "fit_clock_model",
      [](const std::vector<double>& b, const std::vector<double>& t2, double e) {
        const ClockModel c = fit_clock_model(b, t2, e);
        py::dict d;
        d["e"] = c.e;
        d["baseline_rate"] = c.baseline_rate;
        d["slope_c"] = c.slope_c;
        return d;
      },
      py::arg("b_z"), py::arg("t2"), py::arg("e"));
  m.def(
      "filter_function", [](std::size_t n, double total_time, double omega) { return filter_function({n, total_time}, omega); },
      py::arg("n_pulses"), py::arg("total_time"), py::arg("omega"));
  m.def(
      "cpmg_chi",
      [](double gamma_psd, double amplitude, std::size_t n, double total_time, std::optional<double> low,
         std::optional<double> high) { return cpmg_chi(make_psd(gamma_psd, amplitude, low, high), {n, total_time}); },
      py::arg("gamma_psd"), py::arg("amplitude"), py::arg("n_pulses"), py::arg("total_time"),
      py::arg("low_cutoff") = py::none(), py::arg("high_cutoff") = py::none());
  m.def(
      "solve_t2",
      [](double gamma_psd, double amplitude, std::size_t n, std::optional<double> low, std::optional<double> high) {
        return solve_t2(make_psd(gamma_psd, amplitude, low, high), n);
      },
      py::arg("gamma_psd"), py::arg("amplitude"), py::arg("n_pulses"), py::arg("low_cutoff") = py::none(),
      py::arg("high_cutoff") = py::none());
  m.def("psd_exponent_from_scaling", &psd_exponent_from_scaling, py::arg("exponent"));
  m.def(
      "fit_power_law",
      [](const std::vector<double>& n, const std::vector<double>& t2) {
        const auto r = fit_power_law(n, t2);
        py::dict d;
        d["exponent"] = r.exponent;
        d["exponent_sigma"] = r.exponent_sigma;
        d["prefactor"] = r.prefactor;
        return d;
      },
      py::arg("n_pulses"), py::arg("t2"));
  m.def("t1_rate", &t1_rate, py::arg("temp"), py::arg("relax_a"), py::arg("relax_raman"));
  m.def(
      "fit_t1_temperature",
      [](const std::vector<double>& temps, const std::vector<double>& t1s) { return fit_dict(fit_t1_temperature(temps, t1s)); },
      py::arg("temps"), py::arg("t1s"));

  m.def("photophysics_presets", &photophysics_preset_names);
  m.def(
      "oadf_contrast",
      [](const std::string& preset, const std::string& pair, const py::dict& overrides) {
        const auto p = preset_with(preset, overrides);
        const PairLabel label = parse_pair(pair);
        return oadf_contrast(p.params, label, standard_oadf_sequence(p.timing, label));
      },
      py::arg("preset") = "cryo-80K", py::arg("pair") = "xz", py::arg("overrides") = py::dict());
  m.def(
      "run_oadf_sequence",
      [](const std::string& preset, const std::string& pair, double fraction, const py::dict& overrides) {
        const auto p = preset_with(preset, overrides);
        const auto tr = run_sequence(standard_oadf_sequence(p.timing, parse_pair(pair), fraction), p.params);
        Eigen::Matrix<double, Eigen::Dynamic, 8, Eigen::RowMajor> pops(static_cast<Eigen::Index>(tr.times.size()), 8);
        for (std::size_t i = 0; i < tr.times.size(); ++i) pops.row(static_cast<Eigen::Index>(i)) = tr.populations[i].transpose();
        py::dict d;
        d["times"] = tr.times;
        d["populations"] = pops;
        d["emission_rate"] = tr.emission_rate;
        d["oadf_counts"] = tr.oadf_counts;
        d["total_oadf"] = tr.total_oadf;
        return d;
      },
      py::arg("preset") = "cryo-80K", py::arg("pair") = "xz", py::arg("fraction") = 1.0,
      py::arg("overrides") = py::dict(), "Populations columns: S0, S1, T1x, T1y, T1z, T2x, T2y, T2z.");

  m.def("dipole_field", &dipole_field, py::arg("r"), py::arg("moment"), py::arg("axial") = true);
  m.def("proton_number_sensitivity", &proton_number_sensitivity, py::arg("eta_molar"), py::arg("polarization"),
        py::arg("field_per_proton"));
  auto budget = [](double contrast, double photons, double t_init, double t_read, double t_evolve, double molecules,
                   double overhead) {
    SensorBudget b;
    b.contrast = contrast;
    b.photons_per_shot = photons;
    b.t_init = t_init;
    b.t_read = t_read;
    b.t_evolve = t_evolve;
    b.molecules = molecules;
    b.overhead = overhead;
    return b;
  };
  m.def(
      "dc_sensitivity",
      [budget](double slope, double contrast, double photons, double t_init, double t_read, double t_evolve,
               double molecules, double overhead) {
        TwoPointScheme s;
        s.slope = slope;
        const auto r = dc_sensitivity(budget(contrast, photons, t_init, t_read, t_evolve, molecules, overhead), s);
        return py::make_tuple(r.eta, r.eta_molar);
      },
      py::arg("slope"), py::arg("contrast"), py::arg("photons_per_shot"), py::arg("t_init"), py::arg("t_read"),
      py::arg("t_evolve"), py::arg("molecules") = 1.0, py::arg("overhead") = 1.0, "Returns (eta, eta_molar).");
  m.def(
      "ac_sensitivity",
      [budget](double t2, double contrast, double photons, double t_init, double t_read, double t_evolve,
               double molecules, double overhead) {
        const auto r = ac_sensitivity(budget(contrast, photons, t_init, t_read, t_evolve, molecules, overhead), t2);
        return py::make_tuple(r.eta, r.eta_molar);
      },
      py::arg("t2"), py::arg("contrast"), py::arg("photons_per_shot"), py::arg("t_init"), py::arg("t_read"),
      py::arg("t_evolve"), py::arg("molecules") = 1.0, py::arg("overhead") = 1.0, "Returns (eta, eta_molar).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return cli::run(args);
      },
      py::arg("args"), "Runs the fpq command line with the given arguments; returns the exit code.");
}
