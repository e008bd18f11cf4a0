#pragma once

// Config parsing and the CSV formats of the command-line tool. Needs the
// single-header nlohmann/json (vendor/json.hpp) on the include path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cesr/bench.hpp"
#include "cesr/ces_model.hpp"
#include "cesr/errors.hpp"

namespace cesr {

namespace detail {

template <typename T>
T config_value(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline const char* find_key(const nlohmann::json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (j.contains(k)) return k;
  }
  return nullptr;
}

}  // namespace detail

/// Flat JSON object with SweepConfig field names. Missing keys keep their
/// defaults; unknown keys are rejected. "N"/"L" may also be spelled "n"/"l".
inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"N", "n", "L", "l", "trials", "s_grid",
                                              "sigma_x2", "estimators", "nu", "seed",
                                              "workers"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }
  if (j.contains("N") && j.contains("n")) throw ConfigError("both 'N' and 'n' given");
  if (j.contains("L") && j.contains("l")) throw ConfigError("both 'L' and 'l' given");

  SweepConfig cfg;
  if (const char* k = detail::find_key(j, {"N", "n"})) cfg.n = detail::config_value<int>(j, k);
  if (const char* k = detail::find_key(j, {"L", "l"})) cfg.l = detail::config_value<int>(j, k);
  if (j.contains("trials")) cfg.trials = detail::config_value<int>(j, "trials");
  if (j.contains("s_grid")) cfg.s_grid = detail::config_value<std::vector<double>>(j, "s_grid");
  if (j.contains("sigma_x2")) cfg.sigma_x2 = detail::config_value<double>(j, "sigma_x2");
  if (j.contains("nu")) cfg.nu = detail::config_value<double>(j, "nu");
  if (j.contains("seed")) cfg.seed = detail::config_value<std::uint64_t>(j, "seed");
  if (j.contains("workers")) cfg.workers = detail::config_value<int>(j, "workers");
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& name : detail::config_value<std::vector<std::string>>(j, "estimators")) {
      const auto kind = parse_estimator(name);
      if (!kind) throw ConfigError("unknown estimator '" + name + "'");
      if (std::find(cfg.estimators.begin(), cfg.estimators.end(), *kind) != cfg.estimators.end()) {
        throw ConfigError("estimator '" + name + "' listed twice");
      }
      cfg.estimators.push_back(*kind);
    }
  }
  cfg.validate();
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_sweep_config(j);
}

/// %.17g, or an empty field for NaN.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_mse_csv(std::ostream& out, const std::vector<McMetrics>& cells) {
  out << "s,estimator,beta,phi,varrho,varsigma,eps_mu,eps_v,trials,pd_failures\n";
  for (const auto& c : cells) {
    for (const auto& r : c.rows) {
      out << format_real(c.s) << ',' << r.label << ',' << format_real(r.beta) << ','
          << format_real(r.phi) << ',' << format_real(r.varrho) << ',' << format_real(r.varsigma)
          << ',' << format_real(c.eps_mu) << ',' << format_real(c.eps_v) << ',' << c.trials
          << ',' << r.pd_failures << '\n';
    }
  }
}

/// Three rows per N: Tyler, R-matrix, R-vectorized.
inline void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  out << "N,estimator,median_seconds,reps\n";
  for (const auto& r : rows) {
    out << r.n << ",Tyler," << format_real(r.t_tyler) << ',' << r.trials << '\n';
    out << r.n << ",R-matrix," << format_real(r.t_r_matrix) << ',' << r.trials << '\n';
    out << r.n << ",R-vectorized," << format_real(r.t_r_vectorized) << ',' << r.trials << '\n';
  }
}

/// Header `re_1,im_1,...,re_N,im_N`, one observation per line.
inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("data CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.size() % 2 != 0) {
    throw ConfigError("data CSV header must have 2N columns");
  }
  const Index n = static_cast<Index>(header.size() / 2);
  for (Index k = 0; k < n; ++k) {
    const std::string idx = std::to_string(k + 1);
    if (header[2 * k] != "re_" + idx || header[2 * k + 1] != "im_" + idx) {
      throw ConfigError("data CSV header: expected re_" + idx + ",im_" + idx);
    }
  }
  std::vector<CVector> cols;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("data CSV line " + std::to_string(line_no) + ": bad number '" + cell +
                          "'");
      }
    }
    if (vals.size() != header.size()) {
      throw ConfigError("data CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    CVector z(n);
    for (Index k = 0; k < n; ++k) z(k) = cdouble(vals[2 * k], vals[2 * k + 1]);
    cols.push_back(std::move(z));
  }
  if (cols.empty()) throw ConfigError("data CSV has no observations");
  Dataset d;
  d.z.resize(n, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) d.z.col(static_cast<Index>(i)) = cols[i];
  d.validate();
  return d;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& d) {
  for (Index k = 0; k < d.dim(); ++k) {
    out << (k ? "," : "") << "re_" << k + 1 << ",im_" << k + 1;
  }
  out << '\n';
  for (Index i = 0; i < d.size(); ++i) {
    for (Index k = 0; k < d.dim(); ++k) {
      out << (k ? "," : "") << format_real(d.z(k, i).real()) << ','
          << format_real(d.z(k, i).imag());
    }
    out << '\n';
  }
}

/// {"re": [[...],...], "im": [[...],...]} by rows.
inline nlohmann::json complex_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r, c;
    for (Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"re", re}, {"im", im}};
}

inline nlohmann::json complex_to_json(const CVector& v) {
  std::vector<double> re, im;
  for (Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace cesr
