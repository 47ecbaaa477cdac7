#pragma once

// File formats: replication summary CSV, quantile-curve CSV, policy grid
// CSV, and JSON records for run logs and diagnostics.

#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nqnet/config.hpp"
#include "nqnet/drl.hpp"
#include "nqnet/trainer.hpp"

namespace nqnet {

using Json = nlohmann::json;

inline constexpr const char* kSummaryHeader =
    "model,method,N,tau,l1_mean,l1_std,l2sq_mean,l2sq_std,crossing_fraction_mean,runs_completed";

inline void write_summary_csv(std::ostream& out, const ReplicationSummary& summary) {
  out << kSummaryHeader << '\n';
  out << std::setprecision(10);
  for (const auto& r : summary.rows) {
    out << to_string(r.model) << ',' << to_string(r.method) << ',' << r.n << ',' << r.tau << ','
        << r.l1_mean << ',' << r.l1_std << ',' << r.l2sq_mean << ',' << r.l2sq_std << ','
        << r.crossing_fraction_mean << ',' << r.runs_completed << '\n';
  }
}

/// A parsed CSV: header names plus rows of cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("csv: missing column '" + name + "'");
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line) || line.empty()) throw std::runtime_error("csv: empty input");
  if (line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw std::runtime_error("csv: ragged row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

/// Quantile curves of a univariate predictor on an even grid of x values:
/// header x,q_<tau_1>,...,q_<tau_K>.
template <Predictor P>
void write_curves_csv(std::ostream& out, const P& predictor, std::size_t points = 201) {
  const auto& levels = predictor.quantile_levels();
  Matrix x(1, static_cast<Eigen::Index>(points));
  for (std::size_t i = 0; i < points; ++i)
    x(0, static_cast<Eigen::Index>(i)) = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
  const Matrix f = predictor.predict(x);
  out << 'x';
  for (double tau : levels.taus()) out << ",q_" << tau;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out << x(0, c);
    for (Eigen::Index k = 0; k < f.rows(); ++k) out << ',' << f(k, c);
    out << '\n';
  }
}

inline Json history_json(const FitHistory& h) {
  return Json{{"initial_train_loss", h.initial_train_loss},
              {"initial_val_loss", h.initial_val_loss},
              {"train_loss", h.train_loss},
              {"val_loss", h.val_loss},
              {"best_epoch", h.best_epoch},
              {"stop_epoch", h.stop_epoch},
              {"best_val_loss", h.best_val_loss},
              {"seconds", h.seconds}};
}

inline Json report_json(const EvalReport& r) {
  Json j{{"taus", r.taus},
         {"l1", r.l1},
         {"l2sq", r.l2sq},
         {"crossing_fraction", r.crossing_fraction},
         {"non_strict_fraction", r.non_strict_fraction},
         {"test_size", r.test_size}};
  if (r.training) j["training"] = history_json(*r.training);
  return j;
}

inline Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.values()) j[k] = v;
  return j;
}

/// One JSON-lines record per replicate run.
inline Json run_record_json(const RunRecord& r, const RunConfig* cfg = nullptr) {
  Json j{{"model", to_string(r.model)},
         {"method", to_string(r.method)},
         {"N", r.n},
         {"replicate", r.replicate},
         {"seed", r.seed},
         {"status", r.ok ? "ok" : "failed"}};
  if (cfg) j["config"] = config_json(*cfg);
  if (r.ok) {
    j["eval"] = report_json(r.report);
    if (r.report.training) {
      j["epoch_train_loss"] = r.report.training->train_loss;
      j["epoch_val_loss"] = r.report.training->val_loss;
      j["stop_epoch"] = r.report.training->stop_epoch;
      j["wall_clock_seconds"] = r.report.training->seconds;
    }
  } else {
    j["error"] = r.error;
    if (r.failed_epoch > 0) j["failed_epoch"] = r.failed_epoch;
  }
  return j;
}

inline Json diagnostics_json(const IterationDiagnostics& d) {
  Json j{{"iteration", d.iteration},
         {"mean_q_on_grid", d.mean_q_on_grid},
         {"fit_loss_initial", d.fit_loss_initial},
         {"fit_loss", d.fit_loss_final},
         {"stop_epoch", d.stop_epoch},
         {"wall_clock_seconds", d.seconds}};
  j["policy_agreement"] = d.agreement ? Json(*d.agreement) : Json(nullptr);
  return j;
}

/// Greedy policy on an even state grid: state,action,oracle_action,q_0,q_1.
inline void write_policy_csv(std::ostream& out, const FittedIterate& it, const OracleSolution* oracle,
                             std::size_t points = 101) {
  std::vector<double> s(points);
  for (std::size_t i = 0; i < points; ++i)
    s[i] = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
  const Matrix states = states_matrix(s);
  const Matrix q = it.q_values(states);
  const auto act = it.greedy_actions(states);
  out << "state,action,oracle_action";
  for (std::size_t a = 0; a < it.num_actions; ++a) out << ",q_" << a;
  out << '\n' << std::setprecision(12);
  for (std::size_t i = 0; i < points; ++i) {
    out << s[i] << ',' << act[i] << ',';
    if (oracle) out << oracle->action(s[i]);
    for (std::size_t a = 0; a < it.num_actions; ++a)
      out << ',' << q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
    out << '\n';
  }
}

}  // namespace nqnet
