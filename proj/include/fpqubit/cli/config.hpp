#pragma once

// Run configuration: a YAML document of sections whose physical keys carry
// a unit suffix (d_ghz, b_mt, t_read_us, ...). Values are converted to SI on
// load; unknown keys and bare physical keys are schema errors.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fpq::cli {

inline constexpr int kSchemaVersion = 1;

enum class Dim {
  none,         // dimensionless, no suffix
  count,        // non-negative integer, no suffix
  text,         // string, no suffix
  frequency,    // hz, khz, mhz, ghz
  field,        // t, mt, ut, nt
  time,         // s, ms, us, ns
  temperature,  // k
  rate,         // per_s, per_ms, per_us, hz, khz, mhz
  angular,      // rad_per_s
  length,       // m, um, nm
  moment,       // j_per_t
  psd,          // rad_s: amplitude of a power-law spectrum in (rad/s)^(1+gamma)
  relax_direct, // per_k_s
  relax_raman,  // per_k7_s
};

class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& yaml_text);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  std::size_t count(const std::string& section, const std::string& key) const;
  std::size_t count_or(const std::string& section, const std::string& key, std::size_t fallback) const;
  std::vector<double> list(const std::string& section, const std::string& key) const;
  std::vector<double> list_or(const std::string& section, const std::string& key,
                              std::vector<double> fallback) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key, std::string fallback) const;

  /// SI values keyed by base name, sorted. The `run` section is excluded.
  const nlohmann::json& canonical() const { return canonical_; }
  /// SHA-256 of the canonical form, hex.
  std::string hash() const;
  std::string timestamp() const { return timestamp_; }

 private:
  const nlohmann::json& lookup(const std::string& section, const std::string& key) const;
  nlohmann::json canonical_ = nlohmann::json::object();
  std::string timestamp_ = "unset";
};

/// One "key=value" entry of the fit-zfs --init flag, with the same unit
/// suffix rules as the config (d_ghz=2.3, linewidth_mhz=80, amp_xz=1).
/// Returns the base name and the SI value.
std::pair<std::string, double> parse_init_entry(const std::string& entry);

std::string sha256_hex(const std::string& data);

}  // namespace fpq::cli
