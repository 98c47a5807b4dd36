// echochamber: pipeline driver. Every subcommand writes under <outdir>/<name>/.
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "echochamber/pipeline.hpp"

namespace pl = echochamber::pipeline;

namespace {

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> kText = {
      {"build-nets", "retweet, mention and follow networks with summaries"},
      {"partition", "ensemble leaning scores and stance labels"},
      {"tune", "pick the balance ratio that maximizes extreme users"},
      {"rwc", "random-walk controversy on the retweet and mention networks"},
      {"communities", "modularity communities with leaning summaries"},
      {"echo", "neighbor-leaning averages and joint densities"},
      {"spectra", "clustering and nearest-neighbor degree spectra"},
      {"content-stats", "hashtag and domain counts per side"},
      {"dataset", "split-point stance dataset"},
      {"train", "fit a stance classifier on the whole dataset"},
      {"eval", "cross-validated stance classification"},
      {"score", "score out-of-network users with a trained model"},
      {"synth", "write a synthetic data set"},
      {"report", "run the analysis steps and bundle them with a manifest"},
  };
  return kText;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echo-chamber analysis of polarized retweet networks", "echochamber"};
  app.set_version_flag("--version", pl::version());
  app.require_subcommand(1, 1);

  std::string config_file;
  app.add_option("-c,--config", config_file, "key = value configuration file");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "override one key, as key=value (repeatable)");

  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& k : pl::config_keys()) {
    auto* opt = app.add_option(flag_name(k.name), flag_values[k.name], k.help);
    if (!k.default_value.empty()) opt->description(k.help + " [" + k.default_value + "]");
    opt->group("Configuration");
    flag_options[k.name] = opt;
  }

  std::string chosen;
  for (const auto& name : pl::subcommands()) {
    auto* sub = app.add_subcommand(name, descriptions().at(name));
    sub->fallthrough();
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    pl::Config cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) cfg.set(key, flag_values[key]);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw pl::UsageError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    pl::run_subcommand(chosen, cfg);
    std::cout << "wrote " << (std::filesystem::path(cfg.get("outdir")) / chosen).string() << '\n';
    return 0;
  } catch (const pl::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
