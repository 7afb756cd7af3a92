#pragma once

// Tabular CSV interchange, JSON result envelopes and static SVG line plots.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fpq::cli {

/// One column of a table. Every column of a table has the same length.
struct Column {
  std::string name;
  std::vector<double> values;
};

/// Header line plus rows; numbers written with 17 significant digits.
std::string format_csv(const std::vector<Column>& columns);
void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns);

/// Reads a CSV with a header naming exactly `expected` columns, in order.
/// A malformed row raises ValidationError naming its line number.
std::vector<Column> read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected);

/// Spectrum interchange format: field_t, freq_hz, signal.
inline const std::vector<std::string> kSpectrumColumns = {"field_t", "freq_hz", "signal"};

struct Envelope {
  std::string command;
  std::string config_hash;
  std::string timestamp;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<std::string> notes;
};

std::string artifact_version();
nlohmann::json to_json(const Envelope& env);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& plot);

}  // namespace fpq::cli
