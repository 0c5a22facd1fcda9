#pragma once

#include <json.hpp>

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include "decoh/errors.hpp"
#include "decoh/linalg.hpp"

namespace decoh::detail {

using json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

/// Rejects any key of `j` that is not listed in `allowed`.
inline void reject_unknown_keys(const json& j, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join_path(path, key), "unknown key");
  }
}

inline const json& require_key(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(join_path(path, key), "missing required key");
  return j.at(key);
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long>();
}

inline Vec get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], index_path(path, i));
  return v;
}

/// Row-major list of lists.
inline Mat get_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a row-major array of arrays");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  const Vec first = get_vector(j[0], index_path(path, 0));
  Mat m(rows, first.size());
  m.row(0) = first.transpose();
  for (Eigen::Index r = 1; r < rows; ++r) {
    const Vec row = get_vector(j[static_cast<std::size_t>(r)], index_path(path, static_cast<std::size_t>(r)));
    if (row.size() != m.cols()) throw ConfigError(index_path(path, static_cast<std::size_t>(r)), "ragged matrix row");
    m.row(r) = row.transpose();
  }
  return m;
}

/// Complex numbers are written as [re, im] pairs.
inline cplx get_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a [re, im] pair");
  return {get_number(j[0], index_path(path, 0)), get_number(j[1], index_path(path, 1))};
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

inline json cmatrix_to_json(const CMat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

inline CMat get_cmatrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a matrix of [re, im] pairs");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    const std::string rp = index_path(path, static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ConfigError(rp, "expected a square matrix");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = get_complex(row[static_cast<std::size_t>(c)], index_path(rp, static_cast<std::size_t>(c)));
  }
  return m;
}

}  // namespace decoh::detail
