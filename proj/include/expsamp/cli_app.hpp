#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expsamp/errors.hpp"
#include "expsamp/harness.hpp"
#include "expsamp/kernels.hpp"
#include "expsamp/moments.hpp"
#include "expsamp/sampling.hpp"
#include "expsamp/test_functions.hpp"
#include "expsamp/version.hpp"
#include "expsamp/weighting.hpp"

namespace expsamp {

/// Raised when the user asked for --help; carries the text to print.
struct HelpRequested {
  std::string text;
};

struct RunConfig {
  std::string subcommand;
  std::string kernel_id;
  std::string fn;
  std::vector<double> m_list;
  std::vector<double> z_list;
  std::optional<GridSpec> z_grid;
  double domain_a = 0.1;
  double domain_b = 10.0;
  int nodes = 8;
  std::vector<double> nu_list;
  double moment_radius = 64.0;
  int moment_resolution = 2048;
  double z_point = 0.0;
  bool has_z_point = false;
  int order = 1;
  std::string out_path;
  std::string format = "csv";
  std::string precision = "full";
  bool verbose = false;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    const size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string::npos ? next : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return parts;
}

inline double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end == nullptr || *end != '\0')
    throw InvalidParameter("could not parse " + what + " value '" + s + "'");
  return v;
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

inline GridSpec parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3)
    throw InvalidParameter("--z-grid expects min:max:count, got '" + s + "'");
  GridSpec g;
  g.min = parse_double(parts[0], "--z-grid min");
  g.max = parse_double(parts[1], "--z-grid max");
  const double c = parse_double(parts[2], "--z-grid count");
  if (c != std::floor(c) || c < 2) throw InvalidParameter("--z-grid count must be an integer >= 2");
  g.count = static_cast<int>(c);
  return g;
}

inline void parse_domain(const std::string& s, double& a, double& b) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw InvalidParameter("--domain expects a:b, got '" + s + "'");
  a = parse_double(parts[0], "--domain a");
  b = parse_double(parts[1], "--domain b");
}

inline std::string usage_line() {
  return "usage: expsamp {table|sweep|moments|bound|voronovskaja|kernels} [options]\n"
         "run 'expsamp --help' for details";
}

}  // namespace detail

/// Parses command-line arguments (plus an optional JSON config file given
/// with --config; flags override file values) into a validated RunConfig.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"max-product Kantorovich exponential sampling toolkit"};
  app.footer(std::string(kernel_id_grammar()) +
             "test functions: h1 (e^-z cos 2 pi z), h2 (log(1+z)), "
             "h3 (sin z / (1+z^2)), one\n");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string m_str, z_str, nu_str, grid_str, domain_str, config_path;

  struct SubOpts {
    CLI::App* cmd = nullptr;
    CLI::Option *kernel = nullptr, *fn = nullptr, *m = nullptr, *z = nullptr,
                *grid = nullptr, *domain = nullptr, *nodes = nullptr, *nu = nullptr,
                *zpoint = nullptr, *order = nullptr, *out = nullptr, *format = nullptr,
                *precision = nullptr, *config = nullptr;
  };
  std::vector<SubOpts> subs;
  subs.reserve(8);

  auto add_common = [&](CLI::App* cmd, bool needs_fn, bool needs_m, bool table_like) {
    SubOpts so;
    so.cmd = cmd;
    so.kernel = cmd->add_option("--kernel", cfg.kernel_id, "kernel id, e.g. bspline:n=3");
    if (needs_fn) so.fn = cmd->add_option("--fn", cfg.fn, "test function name");
    if (needs_m) so.m = cmd->add_option("--m", m_str, "comma-separated sampling rates");
    if (table_like) {
      so.z = cmd->add_option("--z", z_str, "comma-separated evaluation points");
      so.grid = cmd->add_option("--z-grid", grid_str, "log-uniform grid min:max:count");
    }
    so.domain = cmd->add_option("--domain", domain_str, "compact interval a:b (default 0.1:10)");
    so.nodes = cmd->add_option("--nodes", cfg.nodes, "Gauss-Legendre nodes per cell");
    so.out = cmd->add_option("--out", cfg.out_path, "output path (default: stdout)");
    so.format = cmd->add_option("--format", cfg.format, "csv|json");
    so.precision = cmd->add_option("--precision", cfg.precision, "paper4dp|full");
    so.config = cmd->add_option("--config", config_path, "JSON config file; flags override");
    cmd->add_flag("--verbose", cfg.verbose, "emit auxiliary columns");
    subs.push_back(so);
    return &subs.back();
  };

  auto* table = app.add_subcommand("table", "weighted error table over (z, m)");
  add_common(table, true, true, true);
  auto* sweep = app.add_subcommand("sweep", "sup weighted error per m over a z grid");
  add_common(sweep, true, true, true);
  auto* moments = app.add_subcommand("moments", "discrete sup-moments of a kernel");
  {
    auto* so = add_common(moments, false, false, false);
    so->nu = moments->add_option("--nu", nu_str, "comma-separated moment orders");
    moments->add_option("--radius", cfg.moment_radius, "truncation radius");
    moments->add_option("--resolution", cfg.moment_resolution, "grid samples per unit");
  }
  auto* bound = app.add_subcommand("bound", "theoretical rate and norm bounds");
  add_common(bound, true, true, false);
  auto* voron = app.add_subcommand("voronovskaja", "asymptotic expansion probe");
  {
    auto* so = add_common(voron, true, true, false);
    so->zpoint = voron->add_option("--z", cfg.z_point, "evaluation point");
    so->order = voron->add_option("--order", cfg.order, "expansion order (1..3)");
  }
  auto* kernels = app.add_subcommand("kernels", "list the kernel catalog");
  add_common(kernels, false, false, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream os;
    os << app.help();
    throw HelpRequested{os.str()};
  } catch (const CLI::ParseError& e) {
    throw InvalidParameter(std::string(e.what()) + "\n" + detail::usage_line());
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.subcommand = chosen->get_name();
  const SubOpts* so = nullptr;
  for (const auto& s : subs)
    if (s.cmd == chosen) so = &s;

  // Config file values fill anything the flags left unset.
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw InvalidParameter("cannot read config file '" + config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw InvalidParameter("config file '" + config_path + "' is not valid JSON: " + e.what());
    }
    auto str_of = [](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      std::ostringstream os;
      os << v;
      return os.str();
    };
    auto list_of = [&str_of](const nlohmann::json& v) -> std::string {
      if (!v.is_array()) return str_of(v);
      std::string s;
      for (const auto& item : v) {
        if (!s.empty()) s += ",";
        s += str_of(item);
      }
      return s;
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "kernel" && so->kernel && so->kernel->count() == 0) cfg.kernel_id = str_of(*it);
      else if (key == "fn" && so->fn && so->fn->count() == 0) cfg.fn = str_of(*it);
      else if (key == "m" && so->m && so->m->count() == 0) m_str = list_of(*it);
      else if (key == "z" && so->z && so->z->count() == 0) z_str = list_of(*it);
      else if (key == "z-grid" && so->grid && so->grid->count() == 0) grid_str = str_of(*it);
      else if (key == "domain" && so->domain && so->domain->count() == 0) domain_str = str_of(*it);
      else if (key == "nodes" && so->nodes && so->nodes->count() == 0) cfg.nodes = it->get<int>();
      else if (key == "nu" && so->nu && so->nu->count() == 0) nu_str = list_of(*it);
      else if (key == "out" && so->out && so->out->count() == 0) cfg.out_path = str_of(*it);
      else if (key == "format" && so->format && so->format->count() == 0) cfg.format = str_of(*it);
      else if (key == "precision" && so->precision && so->precision->count() == 0)
        cfg.precision = str_of(*it);
      else if (key == "order" && so->order && so->order->count() == 0) cfg.order = it->get<int>();
      else
        throw InvalidParameter("config file key '" + key +
                               "' is unknown or not applicable to '" + cfg.subcommand + "'");
    }
  }

  if (!m_str.empty()) cfg.m_list = detail::parse_double_list(m_str, "--m");
  if (!z_str.empty()) cfg.z_list = detail::parse_double_list(z_str, "--z");
  if (!nu_str.empty()) cfg.nu_list = detail::parse_double_list(nu_str, "--nu");
  if (!grid_str.empty()) cfg.z_grid = detail::parse_grid(grid_str);
  if (!domain_str.empty()) detail::parse_domain(domain_str, cfg.domain_a, cfg.domain_b);
  if (so->zpoint && so->zpoint->count() > 0) cfg.has_z_point = true;

  // Validation happens before any computation.
  if (!(cfg.domain_a > 0.0 && cfg.domain_a < cfg.domain_b))
    throw InvalidParameter("domain requires 0 < a < b");
  if (cfg.nodes < 2) throw InvalidParameter("--nodes must be >= 2");
  parse_precision(cfg.precision);
  if (cfg.format != "csv" && cfg.format != "json")
    throw InvalidParameter("--format must be csv or json");
  for (const double m : cfg.m_list)
    if (!(m > 0.0)) throw InvalidParameter("--m values must be positive");
  for (const double z : cfg.z_list)
    if (!(z > 0.0)) throw InvalidParameter("--z values must be positive");

  const bool needs_kernel = cfg.subcommand != "kernels";
  if (needs_kernel) {
    if (cfg.kernel_id.empty()) throw InvalidParameter("--kernel is required");
    parse_kernel_id(cfg.kernel_id);  // rejects malformed ids and bad parameters
  }
  if (cfg.subcommand == "table" || cfg.subcommand == "sweep" ||
      cfg.subcommand == "bound" || cfg.subcommand == "voronovskaja") {
    if (cfg.fn.empty()) throw InvalidParameter("--fn is required");
    find_test_function(cfg.fn);
    if (cfg.m_list.empty()) throw InvalidParameter("--m is required and must be non-empty");
  }
  if (cfg.subcommand == "table") {
    if (cfg.z_list.empty() && !cfg.z_grid)
      throw InvalidParameter("table needs --z or --z-grid");
    for (const double z : cfg.z_list)
      if (z < cfg.domain_a || z > cfg.domain_b)
        throw InvalidParameter("--z values must lie inside the domain");
  }
  if (cfg.subcommand == "moments" && cfg.nu_list.empty())
    throw InvalidParameter("moments needs --nu");
  if (cfg.subcommand == "voronovskaja") {
    if (!cfg.has_z_point) throw InvalidParameter("voronovskaja needs --z");
    if (!(cfg.z_point > cfg.domain_a && cfg.z_point < cfg.domain_b))
      throw InvalidParameter("voronovskaja --z must lie inside the domain");
    if (cfg.order < 1 || cfg.order > 3) throw InvalidParameter("--order must be 1..3");
  }
  return cfg;
}

namespace detail {

inline void emit(const RunConfig& cfg, const std::string& payload,
                 const std::string& manifest, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw InvalidParameter("cannot write to '" + cfg.out_path + "'");
  f << payload;
  if (!manifest.empty()) {
    std::ofstream mf(cfg.out_path + ".manifest.json", std::ios::binary);
    if (!mf) throw InvalidParameter("cannot write manifest next to '" + cfg.out_path + "'");
    mf << manifest << "\n";
  }
}

}  // namespace detail

/// Dispatches a validated RunConfig. Returns the process exit status.
inline int execute(const RunConfig& cfg, std::ostream& out = std::cout) {
  const Precision prec = parse_precision(cfg.precision);

  if (cfg.subcommand == "table") {
    std::vector<double> zs = cfg.z_list;
    if (zs.empty()) zs = cfg.z_grid->points();
    const ErrorTable t = run_table(cfg.kernel_id, cfg.fn, cfg.m_list, zs,
                                   {cfg.domain_a, cfg.domain_b}, cfg.nodes);
    if (cfg.format == "json") {
      detail::emit(cfg, table_json(t, prec).dump(2) + "\n", "", out);
    } else {
      detail::emit(cfg, to_csv(t, prec), table_manifest(t, prec).dump(2), out);
    }
    return 0;
  }

  if (cfg.subcommand == "sweep") {
    const GridSpec grid = cfg.z_grid.value_or(GridSpec{});
    const auto rows = convergence_sweep(cfg.kernel_id, cfg.fn, cfg.m_list,
                                        {cfg.domain_a, cfg.domain_b}, grid, cfg.nodes);
    std::string csv = "m,sup_weighted_error\n";
    for (const auto& [m, err] : rows)
      csv += detail::format_decimal(m) + "," + detail::format_cell(err, prec) + "\n";
    detail::emit(cfg, csv, "", out);
    return 0;
  }

  if (cfg.subcommand == "moments") {
    const KernelProfile k = parse_kernel_id(cfg.kernel_id);
    std::string csv = "nu,value,diverged,truncation_radius,grid_resolution\n";
    for (const double nu : cfg.nu_list) {
      const MomentEstimate e = sup_moment(k, nu, cfg.moment_radius, cfg.moment_resolution);
      csv += detail::format_decimal(nu) + "," + detail::format_full(e.value) + "," +
             (e.diverged ? "true" : "false") + "," +
             detail::format_decimal(e.truncation_radius) + "," +
             std::to_string(e.grid_resolution) + "\n";
    }
    detail::emit(cfg, csv, "", out);
    return 0;
  }

  if (cfg.subcommand == "bound") {
    const KernelProfile k = parse_kernel_id(cfg.kernel_id);
    const TestFunction& fn = find_test_function(cfg.fn);
    const WeightContext ctx;
    std::string csv = cfg.verbose ? "m,rate_bound,op_norm_bound,op_norm_bound_alt\n"
                                  : "m,rate_bound,op_norm_bound\n";
    for (const double m : cfg.m_list) {
      const double rate = convergence_rate_bound(fn, m, k, ctx);
      const double opn = operator_norm_bound(m, k);
      csv += detail::format_decimal(m) + "," + detail::format_full(rate) + "," +
             detail::format_full(opn);
      if (cfg.verbose) csv += "," + detail::format_full(operator_norm_bound_zeta2(m, k));
      csv += "\n";
    }
    detail::emit(cfg, csv, "", out);
    return 0;
  }

  if (cfg.subcommand == "voronovskaja") {
    const KernelProfile k = parse_kernel_id(cfg.kernel_id);
    const TestFunction& fn = find_test_function(cfg.fn);
    std::string csv = "m,lhs,lhs_alg,correction,residual,remainder_bound,a0,denominator\n";
    for (const double m : cfg.m_list) {
      const SamplingScheme s =
          SamplingScheme::compact(m, cfg.domain_a, cfg.domain_b, cfg.nodes);
      const VoronovskajaProbe p = voronovskaja_probe(fn, k, s, cfg.z_point, cfg.order);
      csv += detail::format_decimal(m) + "," + detail::format_full(p.lhs) + "," +
             detail::format_full(p.lhs_alg) + "," + detail::format_full(p.correction) + "," +
             detail::format_full(p.residual) + "," + detail::format_full(p.remainder_bound) +
             "," + detail::format_full(p.a0) + "," + detail::format_full(p.denominator) + "\n";
    }
    detail::emit(cfg, csv, "", out);
    return 0;
  }

  if (cfg.subcommand == "kernels") {
    std::string text = kernel_id_grammar();
    text += "\ncatalog defaults:\n";
    text += "id,zeta,support_radius,decay_exponent\n";
    for (const std::string id :
         {"bspline:n=3", "fejer:beta=1,t=0", "jackson:beta=1,n=3,t=0"}) {
      const KernelProfile k = parse_kernel_id(id);
      text += id + "," + detail::format_full(kernel_zeta(k)) + ",";
      text += k.support_radius() ? detail::format_decimal(*k.support_radius()) : "-";
      text += ",";
      text += k.decay_exponent() ? detail::format_decimal(*k.decay_exponent()) : "-";
      text += "\n";
    }
    text += "\ntest functions: ";
    bool first = true;
    for (const auto& f : test_function_registry()) {
      if (!first) text += ", ";
      text += f.name;
      first = false;
    }
    text += "\n";
    detail::emit(cfg, text, "", out);
    return 0;
  }

  throw InvalidParameter("unknown subcommand '" + cfg.subcommand + "'");
}

/// Full CLI entry point: maps errors to distinct exit codes.
///   0 success, 2 configuration/usage, 3 numeric failure, 4 bound inapplicable.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  try {
    const RunConfig cfg = parse_config(args);
    return execute(cfg, out);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const BoundInapplicable& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace expsamp
