#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "expsamp/errors.hpp"
#include "expsamp/kernels.hpp"
#include "expsamp/sampling.hpp"
#include "expsamp/test_functions.hpp"
#include "expsamp/version.hpp"
#include "expsamp/weighting.hpp"

namespace expsamp {

/// Log-uniform z grid specification.
struct GridSpec {
  double min = 0.5;
  double max = 8.0;
  int count = 257;

  std::vector<double> points() const {
    if (!(min > 0.0 && min < max) || count < 2)
      throw InvalidParameter("grid spec requires 0 < min < max and count >= 2");
    std::vector<double> zs(count);
    const double lo = std::log(min);
    const double hi = std::log(max);
    for (int i = 0; i < count; ++i)
      zs[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return zs;
  }
};

struct ErrorTableRow {
  double z = 0.0;
  double exact_weighted = 0.0;
  std::vector<double> approx_weighted;  // one entry per m
  std::vector<double> error_weighted;
};

/// Weighted error table: per z, the weighted exact value w(z) h(z) and the
/// weighted operator value with its absolute error for every sampling rate.
struct ErrorTable {
  std::string kernel_id;
  std::string function_name;
  std::vector<double> m_values;
  std::vector<ErrorTableRow> rows;
  double domain_a = 0.0;
  double domain_b = 0.0;
  int quadrature_nodes = 8;
  std::string timestamp;  // manifest only, never in the CSV
  double wall_ms = 0.0;
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Runs the max-product operator over (z, m) and collects weighted values.
/// Deterministic: rows in z order, columns in m order, no shared state.
inline ErrorTable run_table(const std::string& kernel_id, const std::string& fn_name,
                            const std::vector<double>& ms, const std::vector<double>& zs,
                            std::pair<double, double> domain, int nodes = 8) {
  if (ms.empty()) throw InvalidParameter("run_table requires a non-empty m list");
  if (zs.empty()) throw InvalidParameter("run_table requires a non-empty z list");
  const auto t0 = std::chrono::steady_clock::now();
  const KernelProfile kernel = parse_kernel_id(kernel_id);
  const TestFunction& fn = find_test_function(fn_name);

  std::vector<SamplingScheme> schemes;
  schemes.reserve(ms.size());
  for (const double m : ms)
    schemes.push_back(SamplingScheme::compact(m, domain.first, domain.second, nodes));

  ErrorTable table;
  table.kernel_id = kernel.id();
  table.function_name = fn.name;
  table.m_values = ms;
  table.domain_a = domain.first;
  table.domain_b = domain.second;
  table.quadrature_nodes = nodes;
  table.timestamp = detail::utc_timestamp();

  for (const double z : zs) {
    ErrorTableRow row;
    row.z = z;
    row.exact_weighted = weight(z) * fn.eval(z);
    for (const auto& scheme : schemes) {
      const double approx = max_product_apply(kernel, fn, scheme, z);
      const double approx_w = weight(z) * approx;
      row.approx_weighted.push_back(approx_w);
      row.error_weighted.push_back(std::abs(approx_w - row.exact_weighted));
    }
    table.rows.push_back(std::move(row));
  }
  table.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
  return table;
}

/// Per-m supremum of the weighted pointwise error over a z grid.
inline std::vector<std::pair<double, double>> convergence_sweep(
    const std::string& kernel_id, const std::string& fn_name,
    const std::vector<double>& ms, std::pair<double, double> domain,
    const GridSpec& grid, int nodes = 8) {
  if (ms.empty()) throw InvalidParameter("convergence_sweep requires a non-empty m list");
  const KernelProfile kernel = parse_kernel_id(kernel_id);
  const TestFunction& fn = find_test_function(fn_name);
  const std::vector<double> zs = grid.points();
  for (const double z : zs)
    if (z < domain.first || z > domain.second)
      throw InvalidParameter("sweep grid leaves the compact domain");

  std::vector<std::pair<double, double>> out;
  out.reserve(ms.size());
  for (const double m : ms) {
    const SamplingScheme scheme = SamplingScheme::compact(m, domain.first, domain.second, nodes);
    double sup = 0.0;
    for (const double z : zs) {
      const double err = weight(z) * std::abs(max_product_apply(kernel, fn, scheme, z) - fn.eval(z));
      sup = std::max(sup, err);
    }
    out.emplace_back(m, sup);
  }
  return out;
}

enum class Precision { full, paper4dp };

inline Precision parse_precision(const std::string& s) {
  if (s == "full") return Precision::full;
  if (s == "paper4dp") return Precision::paper4dp;
  throw InvalidParameter("precision must be 'paper4dp' or 'full'");
}

/// Round half-to-even at the fourth decimal. Applied only when emitting.
inline double round_half_even_4dp(double v) {
  return std::nearbyint(v * 1e4) / 1e4;
}

namespace detail {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_cell(double v, Precision p) {
  if (p == Precision::full) return format_full(v);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", round_half_even_4dp(v));
  return buf;
}

}  // namespace detail

/// CSV with header z,exact,approx_m{M},err_m{M},... and LF line endings.
inline std::string to_csv(const ErrorTable& t, Precision p = Precision::full) {
  std::string out = "z,exact";
  for (const double m : t.m_values) {
    const std::string label = detail::format_decimal(m);
    out += ",approx_m" + label + ",err_m" + label;
  }
  out += "\n";
  for (const auto& row : t.rows) {
    out += detail::format_decimal(row.z) + "," + detail::format_cell(row.exact_weighted, p);
    for (size_t i = 0; i < row.approx_weighted.size(); ++i) {
      out += "," + detail::format_cell(row.approx_weighted[i], p);
      out += "," + detail::format_cell(row.error_weighted[i], p);
    }
    out += "\n";
  }
  return out;
}

/// Run manifest: configuration echo, library version, grid metadata.
inline nlohmann::ordered_json table_manifest(const ErrorTable& t, Precision p) {
  nlohmann::ordered_json j;
  j["subcommand"] = "table";
  j["version"] = kVersion;
  j["kernel"] = t.kernel_id;
  j["fn"] = t.function_name;
  j["m"] = t.m_values;
  nlohmann::ordered_json zs = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) zs.push_back(row.z);
  j["z"] = zs;
  j["domain"] = {t.domain_a, t.domain_b};
  j["quadrature_nodes"] = t.quadrature_nodes;
  j["precision"] = (p == Precision::full) ? "full" : "paper4dp";
  j["wall_ms"] = t.wall_ms;
  j["timestamp"] = t.timestamp;
  return j;
}

inline nlohmann::ordered_json table_json(const ErrorTable& t, Precision p) {
  nlohmann::ordered_json j;
  j["manifest"] = table_manifest(t, p);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    r["z"] = row.z;
    r["exact"] = (p == Precision::paper4dp) ? round_half_even_4dp(row.exact_weighted)
                                            : row.exact_weighted;
    nlohmann::ordered_json approx = nlohmann::ordered_json::array();
    nlohmann::ordered_json err = nlohmann::ordered_json::array();
    for (size_t i = 0; i < row.approx_weighted.size(); ++i) {
      approx.push_back((p == Precision::paper4dp) ? round_half_even_4dp(row.approx_weighted[i])
                                                  : row.approx_weighted[i]);
      err.push_back((p == Precision::paper4dp) ? round_half_even_4dp(row.error_weighted[i])
                                               : row.error_weighted[i]);
    }
    r["approx"] = approx;
    r["err"] = err;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

}  // namespace expsamp
