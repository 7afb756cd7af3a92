#include "fpqubit/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "fpqubit/errors.hpp"

namespace fpq::cli {

namespace {

enum class Kind { scalar, list };

struct KeySpec {
  Dim dim;
  Kind kind = Kind::scalar;
};

using SectionSchema = std::map<std::string, KeySpec>;

const std::map<std::string, SectionSchema>& schema() {
  static const std::map<std::string, SectionSchema> s = [] {
    std::map<std::string, SectionSchema> m;
    m["run"] = {{"timestamp", {Dim::text}}};
    m["zfs"] = {{"d", {Dim::frequency}},
                {"e", {Dim::frequency}},
                {"amp_xz", {Dim::none}},
                {"amp_yz", {Dim::none}},
                {"amp_xy", {Dim::none}}};
    m["spectrum"] = {{"linewidth", {Dim::frequency}},
                     {"f_start", {Dim::frequency}},
                     {"f_stop", {Dim::frequency}},
                     {"f_step", {Dim::frequency}},
                     {"fields", {Dim::field, Kind::list}},
                     {"n_orient", {Dim::count}},
                     {"noise", {Dim::none}}};
    m["fit"] = {{"n_orient", {Dim::count}},
                {"b_max", {Dim::field}},
                {"max_evaluations", {Dim::count}}};
    m["rabi"] = {{"field", {Dim::field}},
                 {"drive", {Dim::frequency}},
                 {"b1", {Dim::field, Kind::list}},
                 {"t_stop", {Dim::time}},
                 {"t_step", {Dim::time}},
                 {"n_orient", {Dim::count}},
                 {"capture_factor", {Dim::none}}};
    m["coherence"] = {{"gamma_psd", {Dim::none}},
                      {"psd_amplitude", {Dim::psd}},
                      {"t2_ref", {Dim::time}},
                      {"n_ref", {Dim::count}},
                      {"n_pulses", {Dim::count, Kind::list}},
                      {"low_cutoff", {Dim::angular}},
                      {"high_cutoff", {Dim::angular}},
                      {"decay_points", {Dim::count}}};
    m["clock"] = {{"e", {Dim::frequency}},
                  {"anchor_fields", {Dim::field, Kind::list}},
                  {"anchor_t2", {Dim::time, Kind::list}},
                  {"curve_fields", {Dim::field, Kind::list}}};
    m["t1"] = {{"relax_a", {Dim::relax_direct}},
               {"relax_raman", {Dim::relax_raman}},
               {"temps", {Dim::temperature, Kind::list}},
               {"fit_temps", {Dim::temperature, Kind::list}},
               {"fit_t1", {Dim::time, Kind::list}},
               {"measured_temp", {Dim::temperature}},
               {"measured_t1", {Dim::time}}};
    m["photophysics"] = {{"preset", {Dim::text}},
                         {"k_exc", {Dim::rate}},
                         {"k_fl", {Dim::rate}},
                         {"q_r", {Dim::none}},
                         {"k_isc_x", {Dim::rate}},
                         {"k_isc_y", {Dim::rate}},
                         {"k_isc_z", {Dim::rate}},
                         {"k_pump912", {Dim::rate}},
                         {"k_risc_x", {Dim::rate}},
                         {"k_risc_y", {Dim::rate}},
                         {"k_risc_z", {Dim::rate}},
                         {"k_t2_relax", {Dim::rate}},
                         {"k_trip_decay", {Dim::rate}},
                         {"k_spin_relax", {Dim::rate}},
                         {"t_init", {Dim::time}},
                         {"t_wait", {Dim::time}},
                         {"t_mw_gap", {Dim::time}},
                         {"t_read", {Dim::time}},
                         {"t_tail", {Dim::time}},
                         {"mw_fraction", {Dim::none}},
                         {"samples_per_segment", {Dim::count}}};
    m["sensing"] = {{"bias", {Dim::field}},
                    {"linewidth", {Dim::frequency}},
                    {"n_orient", {Dim::count}},
                    {"f_center", {Dim::frequency}},
                    {"f_min", {Dim::frequency}},
                    {"f_max", {Dim::frequency}},
                    {"f_step", {Dim::frequency}},
                    {"delta", {Dim::field}},
                    {"contrast", {Dim::none}},
                    {"photons_per_shot", {Dim::none}},
                    {"molecules", {Dim::none}},
                    {"overhead", {Dim::none}},
                    {"t_init", {Dim::time}},
                    {"t_read", {Dim::time}},
                    {"t_evolve", {Dim::time}},
                    {"t2", {Dim::time}},
                    {"ac_contrast", {Dim::none}},
                    {"dipole_distance", {Dim::length}},
                    {"proton_moment", {Dim::moment}},
                    {"polarization", {Dim::none}},
                    {"field_per_proton", {Dim::field}}};
    return m;
  }();
  return s;
}

const std::map<std::string, double>& units(Dim d) {
  static const std::map<Dim, std::map<std::string, double>> u = {
      {Dim::frequency, {{"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}}},
      {Dim::field, {{"t", 1.0}, {"mt", 1e-3}, {"ut", 1e-6}, {"nt", 1e-9}}},
      {Dim::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
      {Dim::temperature, {{"k", 1.0}}},
      {Dim::rate, {{"per_s", 1.0}, {"per_ms", 1e3}, {"per_us", 1e6}, {"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}}},
      {Dim::angular, {{"rad_per_s", 1.0}}},
      {Dim::length, {{"m", 1.0}, {"um", 1e-6}, {"nm", 1e-9}}},
      {Dim::moment, {{"j_per_t", 1.0}}},
      {Dim::psd, {{"rad_s", 1.0}}},
      {Dim::relax_direct, {{"per_k_s", 1.0}}},
      {Dim::relax_raman, {{"per_k7_s", 1.0}}},
  };
  static const std::map<std::string, double> empty;
  auto it = u.find(d);
  return it == u.end() ? empty : it->second;
}

bool unitless(Dim d) { return d == Dim::none || d == Dim::count || d == Dim::text; }

struct Resolved {
  std::string base;
  KeySpec spec;
  double scale = 1.0;
};

// Maps a written key onto its schema entry.
Resolved resolve_key(const SectionSchema& sec, const std::string& section, const std::string& key) {
  auto exact = sec.find(key);
  if (exact != sec.end()) {
    if (!unitless(exact->second.dim))
      throw ValidationError("config: key '" + section + "." + key + "' needs a unit suffix (e.g. " + key + "_" +
                            units(exact->second.dim).begin()->first + ")");
    return {key, exact->second, 1.0};
  }
  for (const auto& [base, spec] : sec) {
    if (unitless(spec.dim) || key.size() <= base.size() + 1) continue;
    if (key.compare(0, base.size() + 1, base + "_") != 0) continue;
    const std::string suffix = key.substr(base.size() + 1);
    const auto& table = units(spec.dim);
    auto u = table.find(suffix);
    if (u != table.end()) return {base, spec, u->second};
  }
  throw ValidationError("config: unknown key '" + section + "." + key + "'");
}

double scalar_value(const YAML::Node& n, const std::string& where) {
  if (!n.IsScalar()) throw ValidationError("config: '" + where + "' must be a number");
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    throw ValidationError("config: '" + where + "' is not a number: " + n.Scalar());
  }
  if (!std::isfinite(v)) throw ValidationError("config: '" + where + "' is not finite");
  return v;
}

void check_count(double v, const std::string& where) {
  if (v < 0.0 || std::floor(v) != v || v > 1e15)
    throw ValidationError("config: '" + where + "' must be a non-negative integer");
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Config Config::parse(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& ex) {
    throw ValidationError(std::string("config: YAML parse error: ") + ex.what());
  }
  if (!root.IsMap()) throw ValidationError("config: top level must be a mapping");

  Config cfg;
  bool have_version = false;
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string section = it->first.as<std::string>();
    if (section == "schema_version") {
      const double v = scalar_value(it->second, section);
      if (v != kSchemaVersion)
        throw ValidationError("config: unsupported schema_version " + it->second.Scalar());
      have_version = true;
      continue;
    }
    auto sec_it = schema().find(section);
    if (sec_it == schema().end()) throw ValidationError("config: unknown section '" + section + "'");
    if (!it->second.IsMap()) throw ValidationError("config: section '" + section + "' must be a mapping");

    nlohmann::json out = nlohmann::json::object();
    for (auto kv = it->second.begin(); kv != it->second.end(); ++kv) {
      const std::string key = kv->first.as<std::string>();
      const std::string where = section + "." + key;
      const Resolved r = resolve_key(sec_it->second, section, key);
      if (out.contains(r.base)) throw ValidationError("config: '" + section + "." + r.base + "' given twice");
      const YAML::Node& v = kv->second;
      if (r.spec.dim == Dim::text) {
        if (!v.IsScalar()) throw ValidationError("config: '" + where + "' must be a string");
        out[r.base] = v.Scalar();
      } else if (r.spec.kind == Kind::list) {
        if (!v.IsSequence() || v.size() == 0)
          throw ValidationError("config: '" + where + "' must be a non-empty list");
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double x = scalar_value(v[i], where + "[" + std::to_string(i) + "]");
          if (r.spec.dim == Dim::count) check_count(x, where);
          arr.push_back(x * r.scale);
        }
        out[r.base] = arr;
      } else {
        const double x = scalar_value(v, where);
        if (r.spec.dim == Dim::count) check_count(x, where);
        out[r.base] = x * r.scale;
      }
    }
    if (section == "run") {
      if (out.contains("timestamp")) cfg.timestamp_ = out["timestamp"].get<std::string>();
      continue;
    }
    cfg.canonical_[section] = out;
  }
  if (!have_version) throw ValidationError("config: missing schema_version");
  return cfg;
}

bool Config::has_section(const std::string& section) const { return canonical_.contains(section); }

bool Config::has(const std::string& section, const std::string& key) const {
  return canonical_.contains(section) && canonical_[section].contains(key);
}

const nlohmann::json& Config::lookup(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ValidationError("config: missing required key '" + section + "." + key + "'");
  return canonical_[section][key];
}

double Config::number(const std::string& section, const std::string& key) const {
  const auto& v = lookup(section, key);
  if (!v.is_number()) throw ValidationError("config: '" + section + "." + key + "' must be a single number");
  return v.get<double>();
}

double Config::number_or(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::size_t Config::count(const std::string& section, const std::string& key) const {
  return static_cast<std::size_t>(number(section, key));
}

std::size_t Config::count_or(const std::string& section, const std::string& key, std::size_t fallback) const {
  return has(section, key) ? count(section, key) : fallback;
}

std::vector<double> Config::list(const std::string& section, const std::string& key) const {
  const auto& v = lookup(section, key);
  return v.get<std::vector<double>>();
}

std::vector<double> Config::list_or(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
  return has(section, key) ? list(section, key) : fallback;
}

std::string Config::text(const std::string& section, const std::string& key) const {
  return lookup(section, key).get<std::string>();
}

std::string Config::text_or(const std::string& section, const std::string& key, std::string fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

std::string Config::hash() const { return sha256_hex(canonical_.dump()); }

std::pair<std::string, double> parse_init_entry(const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
    throw ValidationError("--init: expected key=value, got '" + entry + "'");
  static const SectionSchema init_keys = {{"d", {Dim::frequency}},
                                          {"e", {Dim::frequency}},
                                          {"linewidth", {Dim::frequency}},
                                          {"amp_xz", {Dim::none}},
                                          {"amp_yz", {Dim::none}}};
  const Resolved r = resolve_key(init_keys, "init", entry.substr(0, eq));
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(entry.substr(eq + 1), &used);
    if (used != entry.size() - eq - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ValidationError("--init: bad number in '" + entry + "'");
  }
  return {r.base, v * r.scale};
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace fpq::cli
