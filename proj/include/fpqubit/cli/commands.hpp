#pragma once

// Subcommands of the `fpq` tool. Each command reads a RunConfig and writes
// <command>.json (result envelope), <command>.csv (series, csv format only)
// and <command>.svg into the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpqubit/cli/config.hpp"
#include "fpqubit/cli/io.hpp"
#include "fpqubit/spinham.hpp"

namespace fpq::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

struct Options {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string format = "csv";  // csv: series in a CSV file; json: series inside the envelope
  std::optional<std::filesystem::path> data;
  std::vector<std::string> init;  // fit-zfs overrides, key=value
};

/// What a command produced before it is written out.
struct CommandResult {
  Envelope envelope;
  std::vector<Column> series;
  std::string series_name;  // CSV file stem; defaults to the command name
  std::vector<std::pair<std::string, std::vector<Column>>> extra_tables;
  PlotSpec plot;
};

CommandResult cmd_simulate_odmr(const Config& cfg, const Options& opt);
CommandResult cmd_fit_zfs(const Config& cfg, const Options& opt);
CommandResult cmd_rabi(const Config& cfg, const Options& opt);
CommandResult cmd_coherence(const Config& cfg, const Options& opt);
CommandResult cmd_t1(const Config& cfg, const Options& opt);
CommandResult cmd_oadf(const Config& cfg, const Options& opt);
CommandResult cmd_sense(const Config& cfg, const Options& opt);

/// Writes the files of a result into opt.out.
void write_result(const CommandResult& r, const Options& opt);

/// Full command line entry point: parses arguments, runs the command and maps
/// failures onto exit codes (messages go to stderr).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

/// zfs section of a config (d, e required; amplitudes default 1, 1, 0).
ZfsParams zfs_from_config(const Config& cfg);

}  // namespace fpq::cli
