#pragma once

// The five command-line operations (gen-data, train, replicate, drl, plot)
// as library functions: each takes an effective RunConfig, writes its
// output directory and returns a process exit code.
//
// Exit codes: 0 success, 1 config error, 2 runtime or fit failure, 3 I/O.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nqnet/config.hpp"
#include "nqnet/drl.hpp"
#include "nqnet/report.hpp"
#include "nqnet/simdata.hpp"
#include "nqnet/svg.hpp"
#include "nqnet/trainer.hpp"

namespace nqnet {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitIo = 3 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen-data", "train", "replicate", "drl", "plot"};
  return names;
}

namespace detail {

inline ConfigSchema common_keys(const std::string& seed) {
  return {{"seed", seed}, {"out_dir", ""}, {"workers", "1"}};
}

inline void add_fit_keys(ConfigSchema& s, const std::string& max_epochs, const std::string& patience) {
  s.insert({{"batch_size", "128"},
            {"max_epochs", max_epochs},
            {"patience", patience},
            {"lr", "0.001"},
            {"beta1", "0.9"},
            {"beta2", "0.99"},
            {"eps", "1e-8"},
            {"loss", "check"},
            {"kappa", "1"}});
}

inline void add_supervised_keys(ConfigSchema& s) {
  add_fit_keys(s, "1000", "50");
  s.insert({{"n", "512"},
            {"k", "0"},        // 0: the 19-level grid 0.05..0.95
            {"levels", ""},    // explicit comma-separated levels, overrides k
            {"hidden", ""},    // empty: per-model default widths
            {"test_size", "100000"}});
}

}  // namespace detail

/// Keys accepted by a command, with defaults.
inline ConfigSchema command_schema(const std::string& command) {
  using namespace detail;
  if (command == "gen-data") {
    auto s = common_keys("0");
    s.insert({{"model", "linear1d"}, {"n", "512"}});
    return s;
  }
  if (command == "train") {
    auto s = common_keys("0");
    add_supervised_keys(s);
    s.insert({{"model", "wave"}, {"method", "NQ"}, {"curve_points", "201"}});
    return s;
  }
  if (command == "replicate") {
    auto s = common_keys("2024");
    add_supervised_keys(s);
    s.insert({{"models", "wave"}, {"methods", "NQ,DQR_STAR,DQR"}, {"r", "10"}});
    return s;
  }
  if (command == "drl") {
    auto s = common_keys("0");
    add_fit_keys(s, "200", "20");
    s.insert({{"iterations", "20"},
              {"transitions", "2000"},
              {"k", "32"},
              {"hidden", "64,64"},
              {"epsilon", "0.2"},
              {"gamma", "0.9"},
              {"drift", "0.1"},
              {"transition_noise", "0.02"},
              {"noise_scale", "0.5"},
              {"noise_df", "10"},
              {"episode_length", "20"},
              {"parallel_envs", "50"},
              {"validation_fraction", "0.2"},
              {"warm_start", "true"},
              {"rollouts", "10000"},
              {"oracle", "true"},
              {"oracle_grid", "2001"},
              {"policy_points", "101"}});
    return s;
  }
  if (command == "plot") {
    auto s = common_keys("0");
    s.insert({{"input", ""}, {"kind", "fan"}, {"data", ""}, {"metric", "l1_mean"}, {"title", ""},
              {"output", "plot.svg"}});
    return s;
  }
  throw ConfigError("unknown command '" + command + "'");
}

/// Output directory: out_dir if set, else $NQNET_OUT_DIR/<command>, else
/// runs/<command>.
inline std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::string& command) {
  if (!cfg.str("out_dir").empty()) return cfg.str("out_dir");
  const char* root = std::getenv("NQNET_OUT_DIR");
  return std::filesystem::path(root && *root ? root : "runs") / command;
}

namespace detail {

template <class F>
auto config_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(e.what());
  }
}

inline void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void prepare_out_dir(const std::filesystem::path& dir, const RunConfig& cfg) {
  make_dir(dir);
  write_file(dir / "config.txt", [&](std::ostream& o) { cfg.write(o); });
}

inline QuantileLevels levels_from(const RunConfig& cfg) {
  const auto items = cfg.list("levels");
  if (!items.empty()) {
    std::vector<double> t;
    for (const auto& s : items) {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw ConfigError("levels: bad value '" + s + "'");
      t.push_back(v);
    }
    return QuantileLevels(std::move(t));
  }
  const auto k = cfg.size("k");
  return k == 0 ? QuantileLevels::benchmark_grid() : QuantileLevels::uniform(k);
}

inline FitOptions fit_from(const RunConfig& cfg) {
  FitOptions f;
  f.batch_size = cfg.size("batch_size");
  f.max_epochs = cfg.size("max_epochs");
  f.patience = cfg.size("patience");
  f.adam = AdamConfig{cfg.real("lr"), cfg.real("beta1"), cfg.real("beta2"), cfg.real("eps")};
  f.validate();
  return f;
}

inline LossSpec loss_from(const RunConfig& cfg) {
  LossSpec l{parse_loss_kind(cfg.str("loss")), cfg.real("kappa")};
  l.validate();
  return l;
}

inline TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
  t.levels = levels_from(cfg);
  t.hidden = cfg.size_list("hidden");
  t.fit = fit_from(cfg);
  t.loss = loss_from(cfg);
  t.seed = cfg.u64("seed");
  t.validate();
  return t;
}

inline std::size_t positive(const RunConfig& cfg, const std::string& key) {
  const auto v = cfg.size(key);
  if (v == 0) throw ConfigError(key + " must be positive");
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_gen_data(const RunConfig& cfg, std::ostream& log) {
  using namespace detail;
  const auto [model, n, seed] = config_guard([&] {
    return std::tuple{make_model(parse_model_id(cfg.str("model"))), positive(cfg, "n"), cfg.u64("seed")};
  });
  const auto dir = resolve_out_dir(cfg, "gen-data");
  const Dataset ds = sample(model, n, derive_seed(seed, Stream::kData));
  prepare_out_dir(dir, cfg);
  write_file(dir / "data.csv", [&](std::ostream& o) { write_dataset_csv(o, ds); });
  write_file(dir / "data.meta.json", [&](std::ostream& o) {
    o << Json{{"model", std::string(to_string(model.id))}, {"n", n}, {"seed", seed}}.dump(2) << '\n';
  });
  log << "wrote " << n << " rows to " << (dir / "data.csv").string() << '\n';
  return kExitOk;
}

inline int cmd_train(const RunConfig& cfg, std::ostream& log) {
  using namespace detail;
  const auto [model, n, tc, test_size, points] = config_guard([&] {
    TrainConfig t = train_config_from(cfg);
    t.head = parse_head_kind(cfg.str("method"));
    const auto n = positive(cfg, "n");
    if (n < 8) throw ConfigError("n must be at least 8");
    return std::tuple{make_model(parse_model_id(cfg.str("model"))), n, t, positive(cfg, "test_size"),
                      positive(cfg, "curve_points")};
  });
  const auto dir = resolve_out_dir(cfg, "train");
  prepare_out_dir(dir, cfg);

  TrainResult res;
  try {
    res = train(model, n, tc);
  } catch (const FitDiverged& e) {
    log << "fit failed: " << e.what() << '\n';
    write_file(dir / "eval.json", [&](std::ostream& o) {
      o << Json{{"status", "failed"}, {"error", e.what()}, {"failed_epoch", e.epoch()}}.dump(2) << '\n';
    });
    return kExitRuntime;
  }
  EvalReport rep = evaluate(res.predictor, model, test_size, derive_seed(tc.seed, Stream::kTest));
  rep.training = res.history;

  write_file(dir / "eval.json", [&](std::ostream& o) {
    Json j = report_json(rep);
    j["status"] = "ok";
    j["model"] = std::string(to_string(model.id));
    j["method"] = std::string(to_string(tc.head));
    j["N"] = n;
    j["seed"] = tc.seed;
    o << j.dump(2) << '\n';
  });
  write_file(dir / "loss_curve.csv", [&](std::ostream& o) {
    o << "epoch,train_loss,val_loss\n" << std::setprecision(12);
    o << 0 << ',' << res.history.initial_train_loss << ',' << res.history.initial_val_loss << '\n';
    for (std::size_t e = 0; e < res.history.train_loss.size(); ++e)
      o << e + 1 << ',' << res.history.train_loss[e] << ',' << res.history.val_loss[e] << '\n';
  });
  if (model.input_dim == 1) {
    const Dataset ds = sample(model, n, derive_seed(tc.seed, Stream::kData));
    write_file(dir / "data.csv", [&](std::ostream& o) { write_dataset_csv(o, ds); });
    std::ostringstream curves;
    write_curves_csv(curves, res.predictor, points);
    write_file(dir / "curves.csv", [&](std::ostream& o) { o << curves.str(); });
    std::istringstream ci(curves.str());
    std::ostringstream data_text;
    write_dataset_csv(data_text, ds);
    std::istringstream di(data_text.str());
    const CsvTable ct = read_csv(ci), dt = read_csv(di);
    const std::string title = std::string(to_string(model.id)) + " " + std::string(to_string(tc.head)) +
                              " N=" + std::to_string(n);
    write_file(dir / "fan.svg", [&](std::ostream& o) { o << render_svg(fan_chart(ct, &dt, title)); });
  }

  double avg = 0.0;
  for (double v : rep.l1) avg += v;
  avg /= static_cast<double>(rep.l1.size());
  log << to_string(model.id) << ' ' << to_string(tc.head) << " N=" << n << ": mean L1 " << avg
      << ", crossing fraction " << rep.crossing_fraction << ", stopped at epoch " << res.history.stop_epoch
      << '\n';
  return kExitOk;
}

inline int cmd_replicate(const RunConfig& cfg, std::ostream& log) {
  using namespace detail;
  const ReplicateOptions opts = config_guard([&] {
    ReplicateOptions o;
    for (const auto& m : cfg.list("models")) o.models.push_back(parse_model_id(m));
    for (const auto& m : cfg.list("methods")) o.methods.push_back(parse_head_kind(m));
    if (o.models.empty() || o.methods.empty()) throw ConfigError("models and methods must be non-empty");
    o.n = positive(cfg, "n");
    if (o.n < 8) throw ConfigError("n must be at least 8");
    o.replicates = positive(cfg, "r");
    o.base_seed = cfg.u64("seed");
    o.train = train_config_from(cfg);
    o.test_size = positive(cfg, "test_size");
    o.workers = positive(cfg, "workers");
    return o;
  });
  const auto dir = resolve_out_dir(cfg, "replicate");
  prepare_out_dir(dir, cfg);

  const ReplicationSummary summary = replicate(opts);
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary); });
  write_file(dir / "runs.jsonl", [&](std::ostream& o) {
    for (const auto& r : summary.runs) o << run_record_json(r, &cfg).dump() << '\n';
  });
  if (!summary.rows.empty()) {
    std::ostringstream text;
    write_summary_csv(text, summary);
    std::istringstream in(text.str());
    const CsvTable t = read_csv(in);
    write_file(dir / "l1.svg", [&](std::ostream& o) { o << render_svg(error_chart(t, "l1_mean")); });
  }
  log << summary.runs.size() - summary.failures << " of " << summary.runs.size() << " runs completed; summary in "
      << (dir / "summary.csv").string() << '\n';
  for (const auto& r : summary.runs)
    if (!r.ok) log << "  failed: " << to_string(r.model) << ' ' << to_string(r.method) << " r=" << r.replicate
                   << ": " << r.error << '\n';
  return summary.failures == 0 ? kExitOk : kExitRuntime;
}

inline int cmd_drl(const RunConfig& cfg, std::ostream& log) {
  using namespace detail;
  struct Resolved {
    MDPSpec mdp;
    DrlConfig drl;
    std::size_t iterations, transitions, rollouts, oracle_grid, policy_points;
    bool oracle;
  };
  const Resolved r = config_guard([&] {
    Resolved x;
    x.mdp.gamma = cfg.real("gamma");
    x.mdp.drift = cfg.real("drift");
    x.mdp.transition_noise = cfg.real("transition_noise");
    x.mdp.noise_scale = cfg.real("noise_scale");
    x.mdp.noise_df = cfg.real("noise_df");
    x.mdp.validate();
    x.drl.k = positive(cfg, "k");
    x.drl.hidden = cfg.size_list("hidden");
    x.drl.fit = fit_from(cfg);
    x.drl.loss = loss_from(cfg);
    x.drl.epsilon = cfg.real("epsilon");
    x.drl.episode_length = cfg.size("episode_length");
    x.drl.parallel_envs = cfg.size("parallel_envs");
    x.drl.validation_fraction = cfg.real("validation_fraction");
    x.drl.warm_start = cfg.flag("warm_start");
    x.drl.seed = cfg.u64("seed");
    x.drl.validate();
    x.iterations = cfg.size("iterations");
    x.transitions = positive(cfg, "transitions");
    x.rollouts = positive(cfg, "rollouts");
    x.oracle = cfg.flag("oracle");
    x.oracle_grid = cfg.size("oracle_grid");
    if (x.oracle && x.oracle_grid < 2) throw ConfigError("oracle_grid must be at least 2");
    x.policy_points = positive(cfg, "policy_points");
    return x;
  });
  const auto dir = resolve_out_dir(cfg, "drl");
  prepare_out_dir(dir, cfg);

  std::optional<OracleSolution> oracle;
  if (r.oracle) {
    oracle = dp_oracle(r.mdp, r.oracle_grid);
    log << "oracle J* = " << oracle->j_star << " (" << oracle->iterations << " sweeps)\n";
  }

  std::ofstream diag(dir / "diagnostics.jsonl");
  if (!diag) throw IoError("cannot open diagnostics.jsonl for writing");
  Algorithm1Result res;
  try {
    res = run_algorithm1(r.mdp, r.iterations, r.transitions, r.drl, oracle ? &*oracle : nullptr,
                         [&](const IterationDiagnostics& d) {
                           diag << diagnostics_json(d).dump() << '\n' << std::flush;
                           log << "iteration " << d.iteration << ": mean Q " << d.mean_q_on_grid;
                           if (d.agreement) log << ", agreement " << *d.agreement;
                           log << '\n';
                         });
  } catch (const IterationFailed& e) {
    log << "fit failed at " << e.what() << '\n';
    return kExitRuntime;
  }
  if (!diag) throw IoError("write failed for diagnostics.jsonl");

  write_file(dir / "policy.csv", [&](std::ostream& o) {
    write_policy_csv(o, res.final_iterate, oracle ? &*oracle : nullptr, r.policy_points);
  });
  const Policy pi = greedy_policy(res.final_iterate);
  const double j_pi = monte_carlo_return(pi, r.mdp, r.rollouts, derive_seed(r.drl.seed, Stream::kRollout));
  Json result{{"iterations", r.iterations}, {"transitions", r.transitions}, {"j_policy_mc", j_pi},
              {"rollouts", r.rollouts}};
  if (oracle) {
    result["j_star"] = oracle->j_star;
    result["regret"] = oracle->j_star - j_pi;
    result["policy_agreement"] = policy_agreement(pi, *oracle);
  }
  write_file(dir / "result.json", [&](std::ostream& o) { o << result.dump(2) << '\n'; });
  log << "J(pi_M) ~ " << j_pi;
  if (oracle) log << ", J* = " << oracle->j_star << ", agreement " << result["policy_agreement"].get<double>();
  log << '\n';
  return kExitOk;
}

inline int cmd_plot(const RunConfig& cfg, std::ostream& log) {
  using namespace detail;
  const std::string kind = cfg.str("kind");
  if (kind != "fan" && kind != "error") throw ConfigError("kind must be 'fan' or 'error'");
  if (cfg.str("input").empty()) throw ConfigError("input is required");
  if (cfg.str("output").empty()) throw ConfigError("output must be non-empty");

  auto load = [](const std::string& path) {
    std::istringstream in(read_text(path));
    try {
      return read_csv(in);
    } catch (const std::runtime_error& e) {
      throw PlotError(path + ": " + e.what());
    }
  };
  const CsvTable input = load(cfg.str("input"));
  std::string svg;
  if (kind == "fan") {
    std::optional<CsvTable> data;
    if (!cfg.str("data").empty()) data = load(cfg.str("data"));
    const std::string title = cfg.str("title").empty() ? "quantile curves" : cfg.str("title");
    svg = render_svg(fan_chart(input, data ? &*data : nullptr, title));
  } else {
    ChartSpec chart = error_chart(input, cfg.str("metric"));
    if (!cfg.str("title").empty()) chart.title = cfg.str("title");
    svg = render_svg(chart);
  }
  const auto dir = resolve_out_dir(cfg, "plot");
  prepare_out_dir(dir, cfg);
  const auto path = dir / cfg.str("output");
  write_file(path, [&](std::ostream& o) { o << svg; });
  log << "wrote " << path.string() << '\n';
  return kExitOk;
}

/// Runs a command and maps failures to exit codes; messages go to err.
inline int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (command == "gen-data") return cmd_gen_data(cfg, out);
    if (command == "train") return cmd_train(cfg, out);
    if (command == "replicate") return cmd_replicate(cfg, out);
    if (command == "drl") return cmd_drl(cfg, out);
    if (command == "plot") return cmd_plot(cfg, out);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace nqnet
