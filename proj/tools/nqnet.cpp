// nqnet command-line tool. Each subcommand reads an optional flat config
// file and applies flag overrides on top (defaults < --config < flags).

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nqnet/commands.hpp"

namespace {

struct Sub {
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flags;  // schema key -> value from the command line
};

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (auto& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-crossing quantile networks: simulation, training, replication and distributional RL"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::map<std::string, Sub> subs;
  const std::map<std::string, std::string> about{
      {"gen-data", "Sample a dataset from a simulation model"},
      {"train", "Fit one quantile network and evaluate it against the true curves"},
      {"replicate", "Replicated benchmark over models x methods, summary table"},
      {"drl", "Fitted distributional Q iteration on the toy MDP"},
      {"plot", "Render a curves or summary CSV as SVG"}};

  for (const auto& name : nqnet::command_names()) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, about.at(name));
    s.app->add_option("--config", s.config_path, "Flat key = value config file");
    s.app->add_option("--set", s.assignments, "Override any config key (key=value), repeatable");
    for (const auto& [key, def] : nqnet::command_schema(name)) {
      auto* opt = s.app->add_option_function<std::string>(
          flag_name(key), [&s, key = key](const std::string& v) { s.flags[key] = v; },
          "default: " + (def.empty() ? std::string("(empty)") : def));
      opt->type_name("VALUE");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nqnet::kExitConfig;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    nqnet::RunConfig cfg(nqnet::command_schema(name));
    try {
      if (!s.config_path.empty()) {
        std::ifstream in(s.config_path);
        if (!in) {
          std::cerr << "i/o error: cannot read config " << s.config_path << '\n';
          return nqnet::kExitIo;
        }
        cfg.merge_file(in);
      }
      for (const auto& a : s.assignments) cfg.set_assignment(a);
      for (const auto& [k, v] : s.flags) cfg.set(k, v);
    } catch (const nqnet::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return nqnet::kExitConfig;
    }
    return nqnet::run_command(name, cfg, std::cout, std::cerr);
  }
  return nqnet::kExitConfig;
}
