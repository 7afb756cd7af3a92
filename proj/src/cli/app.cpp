#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "fpqubit/cli/commands.hpp"
#include "fpqubit/errors.hpp"

namespace fpq::cli {

namespace {

using Handler = std::function<CommandResult(const Config&, const Options&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"simulate-odmr", cmd_simulate_odmr}, {"fit-zfs", cmd_fit_zfs}, {"rabi", cmd_rabi},
      {"coherence", cmd_coherence},         {"t1", cmd_t1},           {"oadf", cmd_oadf},
      {"sense", cmd_sense},
  };
  return h;
}

}  // namespace

void write_result(const CommandResult& r, const Options& opt) {
  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) throw IoError("cannot create output directory " + opt.out.string() + ": " + ec.message());

  const std::string& name = r.envelope.command;
  nlohmann::json env = to_json(r.envelope);
  if (opt.format == "json") {
    auto table = [](const std::vector<Column>& cols) {
      nlohmann::json t = nlohmann::json::object();
      for (const auto& c : cols) t[c.name] = c.values;
      return t;
    };
    env["series"] = table(r.series);
    for (const auto& [stem, cols] : r.extra_tables) env["tables"][stem] = table(cols);
  } else {
    write_csv(opt.out / ((r.series_name.empty() ? name : r.series_name) + ".csv"), r.series);
    for (const auto& [stem, cols] : r.extra_tables) write_csv(opt.out / (stem + ".csv"), cols);
  }
  write_json(opt.out / (name + ".json"), env);
  write_text(opt.out / (name + ".svg"), render_svg(r.plot));
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Spin-1 molecular qubit workbench", "fpq"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  std::string config_path;
  std::string out_dir = ".";
  std::string data_path;
  app.add_option("--config", config_path, "YAML run configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", opt.threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", opt.seed, "seed for noise injection");
  app.add_option("--format", opt.format, "series output format")->check(CLI::IsMember({"csv", "json"}));

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, _] : handlers()) subs[name] = app.add_subcommand(name);
  subs["fit-zfs"]->add_option("--data", data_path, "spectrum CSV (field_t,freq_hz,signal)")->required();
  subs["fit-zfs"]->add_option("--init", opt.init, "initial values, key=value (e.g. d_ghz=2.3)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  opt.config = config_path;
  opt.out = out_dir;
  if (!data_path.empty()) opt.data = std::filesystem::path(data_path);

  try {
    const Config cfg = Config::load(opt.config);
    CommandResult r = handlers().at(command)(cfg, opt);
    r.envelope.config_hash = cfg.hash();
    r.envelope.timestamp = cfg.timestamp();
    write_result(r, opt);
    std::cout << command << ": wrote " << (opt.out / (command + ".json")).string() << "\n";
    return kOk;
  } catch (const ValidationError& e) {
    std::cerr << "fpq " << command << ": error: " << e.what() << "\n";
    return kValidation;
  } catch (const YAML::Exception& e) {
    std::cerr << "fpq " << command << ": config error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "fpq " << command << ": numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "fpq " << command << ": I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "fpq " << command << ": config error: " << e.what() << "\n";
    return kValidation;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("fpq");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fpq::cli
