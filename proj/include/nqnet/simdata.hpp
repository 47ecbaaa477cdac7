#pragma once

// Simulation models with known conditional quantile functions. Every model
// has the location-scale form Q(x, tau) = m(x) + s(x) * F^{-1}(tau), so a
// draw Y | X = x is generated by inverse transform: Y = Q(x, U), U ~ U(0,1).

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nqnet/nn_core.hpp"
#include "nqnet/rng.hpp"

namespace nqnet {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse of the standard normal CDF. Acklam's rational approximation
/// refined by two Halley steps against erfc; |Phi(x) - p| is at the level of
/// double rounding.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("std_normal_quantile: p must lie in (0,1)");
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    // Phi(x) - p, evaluated through the smaller tail to keep relative accuracy.
    const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// CDF of Student's t with 2 degrees of freedom.
inline double student_t2_cdf(double x) { return 0.5 + x / (2.0 * std::sqrt(2.0 + x * x)); }

/// Closed-form inverse of student_t2_cdf.
inline double student_t2_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("student_t2_quantile: p must lie in (0,1)");
  return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
}

enum class ModelId { Linear1D, Wave, Angle, MvLinear, SingleIndex, Additive };

inline constexpr std::array<ModelId, 6> kAllModels{ModelId::Linear1D, ModelId::Wave,
                                                   ModelId::Angle,    ModelId::MvLinear,
                                                   ModelId::SingleIndex, ModelId::Additive};

inline constexpr std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::Linear1D: return "linear1d";
    case ModelId::Wave: return "wave";
    case ModelId::Angle: return "angle";
    case ModelId::MvLinear: return "mvlinear";
    case ModelId::SingleIndex: return "sindex";
    case ModelId::Additive: return "additive";
  }
  return "?";
}

inline ModelId parse_model_id(std::string_view name) {
  std::string s(name);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (auto id : kAllModels)
    if (s == to_string(id)) return id;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (valid: linear1d, wave, angle, mvlinear, sindex, additive)");
}

inline constexpr std::array<double, 8> kCoefA{1.012, -0.965, -0.785, 1.336, 0.0, 0.378, 0.599, 1.292};
inline constexpr std::array<double, 8> kCoefB{1.002, 0.0, -0.497, 3.993, 0.0, 0.0, 0.0, 0.0};

struct SimModel {
  ModelId id;
  std::size_t input_dim;
  std::array<double, 8> a = kCoefA;
  std::array<double, 8> b = kCoefB;

  std::string_view name() const { return to_string(id); }
};

inline SimModel make_model(ModelId id) {
  const bool univariate = id == ModelId::Linear1D || id == ModelId::Wave || id == ModelId::Angle;
  return SimModel{id, univariate ? std::size_t{1} : std::size_t{8}};
}

namespace detail {
inline double dot8(const std::array<double, 8>& c, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < 8; ++i) s += c[i] * x[i];
  return s;
}
}  // namespace detail

/// Location and scale of the conditional law; Q(x, tau) = loc + scale * noise_quantile(tau).
struct LocationScale {
  double location;
  double scale;
  bool t2_noise;  // Student-t(2) noise, otherwise standard normal
};

inline LocationScale location_scale(const SimModel& model, std::span<const double> x) {
  using std::numbers::pi;
  switch (model.id) {
    case ModelId::Linear1D: return {2.0 * x[0], 1.0, true};
    case ModelId::Wave:
      return {2.0 * x[0] * std::sin(4.0 * pi * x[0]), std::exp(4.0 * x[0] - 2.0), false};
    case ModelId::Angle:
      return {4.0 * (1.0 - std::abs(x[0] - 0.5)), std::abs(std::sin(pi * x[0])), false};
    case ModelId::MvLinear: return {2.0 * detail::dot8(model.a, x), 1.0, true};
    case ModelId::SingleIndex:
      return {std::exp(0.1 * detail::dot8(model.a, x)), std::abs(std::sin(pi * detail::dot8(model.b, x))),
              false};
    case ModelId::Additive:
      return {3.0 * x[0] + 4.0 * (x[1] - 0.5) * (x[1] - 0.5) + 2.0 * std::sin(pi * x[2]) -
                  5.0 * std::abs(x[3] - 0.5),
              std::exp(0.1 * (detail::dot8(model.b, x) - 0.5)), false};
  }
  return {0.0, 0.0, false};
}

/// Ground-truth conditional tau-quantile of Y given X = x.
inline double true_quantile(const SimModel& model, std::span<const double> x, double tau) {
  if (x.size() != model.input_dim)
    throw std::invalid_argument("true_quantile: x has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.input_dim));
  for (double xi : x)
    if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("true_quantile: x outside [0,1]^d");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("true_quantile: tau outside (0,1)");
  const auto ls = location_scale(model, x);
  const double z = ls.t2_noise ? student_t2_quantile(tau) : std_normal_quantile(tau);
  return ls.location + ls.scale * z;
}

/// n samples; X is input_dim x n (one column per sample).
struct Dataset {
  ModelId model_id = ModelId::Linear1D;
  std::uint64_t seed = 0;
  Matrix x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::size_t input_dim() const { return static_cast<std::size_t>(x.rows()); }
};

/// X ~ U[0,1]^d, Y = true_quantile(model, X, U) with U ~ U(0,1).
inline Dataset sample(const SimModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  Dataset ds;
  ds.model_id = model.id;
  ds.seed = seed;
  ds.x.resize(static_cast<Eigen::Index>(model.input_dim), static_cast<Eigen::Index>(n));
  ds.y.resize(n);
  Rng rng(seed);
  std::vector<double> x(model.input_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < model.input_dim; ++j) {
      x[j] = rng.uniform01();
      ds.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x[j];
    }
    ds.y[i] = true_quantile(model, x, rng.uniform01());
  }
  return ds;
}

/// CSV with header x_1..x_d,y; values written with 17 significant digits so
/// a reload is bit-identical.
inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  const auto d = ds.input_dim();
  for (std::size_t j = 0; j < d; ++j) out << "x_" << (j + 1) << ',';
  out << "y\n";
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j)
      out << ds.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) << ',';
    out << ds.y[i] << '\n';
  }
}

inline Dataset read_dataset_csv(std::istream& in, ModelId model_id = ModelId::Linear1D) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset csv: empty input");
  std::size_t cols = 1;
  for (char ch : line) cols += ch == ',';
  if (cols < 2 || line.rfind("x_1", 0) != 0) throw std::runtime_error("dataset csv: bad header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != cols) throw std::runtime_error("dataset csv: ragged row");
    rows.push_back(std::move(row));
  }
  Dataset ds;
  ds.model_id = model_id;
  ds.x.resize(static_cast<Eigen::Index>(cols - 1), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j)
      ds.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[i][j];
    ds.y.push_back(rows[i].back());
  }
  return ds;
}

}  // namespace nqnet
