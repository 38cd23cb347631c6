#pragma once

// Command-line front end: stats, fit, indices, simulate and export-plot.
// Exit codes: 0 success, 1 usage, 2 input/output or data, 3 numerical failure.

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/empirical.hpp"
#include "leimkuhler/errors.hpp"
#include "leimkuhler/fit.hpp"
#include "leimkuhler/indices.hpp"
#include "leimkuhler/report.hpp"

namespace leimkuhler::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline constexpr const char* kConfigEnvVar = "LEIMKUHLER_CONFIG";

struct Environment {
  std::optional<std::string> config_path;  // default config file
  std::istream* stdin_stream = &std::cin;
  std::optional<std::string> now;  // fixed timestamp for --timestamp

  static Environment from_process() {
    Environment env;
    if (const char* p = std::getenv(kConfigEnvVar); p && *p) env.config_path = p;
    return env;
  }
};

/// A flag value the program cannot act on.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

// Settings a config file may supply, by long option name.
inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "format",          "column",   "divisor",         "r",           "seed",
      "multistart",      "max-iterations", "gradient-tolerance", "step-tolerance", "se-divisor",
      "caic-k",          "parameterization", "serial",   "resolution",  "scale",
      "mixture"};
  return keys;
}

/// key = value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = leimkuhler::detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw UsageError(path + ": line " + std::to_string(line_no) + ": expected key = value");
    std::string key(leimkuhler::detail::trim(t.substr(0, eq)));
    std::string value(leimkuhler::detail::trim(t.substr(eq + 1)));
    if (!config_keys().count(key)) {
      throw UsageError(path + ": line " + std::to_string(line_no) + ": unknown setting '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.emplace_back(leimkuhler::detail::trim(cur));
  return out;
}

inline std::map<std::string, double> parse_assignments(const std::string& text) {
  std::map<std::string, double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value in --params, got '" + item + "'");
    const std::string name(leimkuhler::detail::trim(std::string_view(item).substr(0, eq)));
    const std::string value(leimkuhler::detail::trim(std::string_view(item).substr(eq + 1)));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw UsageError("parameter " + name + " is not a number: '" + value + "'");
    if (!out.emplace(name, v).second) throw UsageError("parameter " + name + " given twice");
  }
  return out;
}

inline Family family_or_usage(const std::string& tag) {
  const auto f = parse_family(tag);
  if (!f) {
    throw UsageError("unknown family '" + tag + "' (expected power, gp, pareto, pg, pig, gpg, gpig or pagb)");
  }
  return *f;
}

inline CurveModel model_from_flags(const std::string& tag, const std::string& params) {
  const Family family = family_or_usage(tag);
  const auto given = parse_assignments(params);
  ParamVector p;
  for (const auto& [name, value] : given) {
    const auto id = parse_param(name);
    if (!id) throw UsageError("unknown parameter '" + name + "'");
    p[*id] = value;
  }
  try {
    return CurveModel(family, p);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

inline std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct InputFlags {
  std::string path;
  std::string format = "lines";
  std::string column = "citations";

  InputFormat input_format() const {
    return format == "csv" ? InputFormat::csv(column) : InputFormat::lines();
  }
};

inline CitationDataset load(const InputFlags& in, const Environment& env) {
  try {
    if (in.path == "-") return ingest(*env.stdin_stream, in.input_format(), "stdin");
    return ingest_file(in.path, in.input_format());
  } catch (const InputError& e) {
    throw ValidationError((in.path == "-" ? std::string("stdin") : in.path) + ": " + e.what());
  }
}

inline void add_input_flags(CLI::App* cmd, InputFlags& in, bool required = true) {
  auto* opt = cmd->add_option("input", in.path, "Citation counts: one per line, or CSV with --format csv ('-' reads stdin)");
  if (required) opt->required();
  cmd->add_option("--format", in.format, "Input format")->check(CLI::IsMember({"lines", "csv"}));
  cmd->add_option("--column", in.column, "CSV column holding the counts");
}

// Writes to a file, or to `out` when the target is "-".
inline void emit(const std::string& target, const std::string& text, std::ostream& out) {
  if (target == "-") {
    out << text;
    return;
  }
  std::ofstream f(target, std::ios::binary);
  if (!f) throw IoError("cannot write " + target);
  f << text;
  if (!f.flush()) throw IoError("failed writing " + target);
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string stats_text(const DescriptiveStats& s) {
  std::ostringstream o;
  o << "n                 " << s.n << "\n"
    << "total             " << s.total << "\n"
    << "min               " << s.min << "\n"
    << "max               " << s.max << "\n"
    << "mean              " << number(s.mean) << "\n"
    << "variance          " << number(s.variance) << "\n"
    << "dispersion_index  " << (s.dispersion_index ? number(*s.dispersion_index) : "undefined") << "\n";
  return o.str();
}

inline std::string indices_text(const IndexReport& r) {
  std::ostringstream o;
  auto row = [&o](const std::string& label, double value, IndexMethod m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-18s", label.c_str());
    o << buf << number(value) << "  (" << to_string(m) << ")";
  };
  row("gini", r.gini.value, r.gini.method);
  o << "\n";
  for (const auto& g : r.generalized_gini) {
    row("gini_r=" + number(g.r), g.value, g.method);
    o << "\n";
  }
  row("pietra", r.pietra.value, r.pietra.method);
  o << "  at u=" << number(r.pietra.argmax_u) << "\n";
  return o.str();
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   const Environment& env = Environment::from_process()) {
  CLI::App app{"Leimkuhler curve modelling of citation concentration", "leimkuhler"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file (default: $" + std::string(kConfigEnvVar) + ")");
  app.set_version_flag("--version", std::string(kToolVersion));

  detail::InputFlags input;
  std::string divisor = "population";
  std::vector<double> r_values = default_r_values();
  bool json = false;

  // stats
  auto* stats = app.add_subcommand("stats", "Descriptive statistics of a citation dataset");
  detail::add_input_flags(stats, input);
  stats->add_option("--divisor", divisor, "Variance divisor")->check(CLI::IsMember({"population", "sample"}));
  stats->add_flag("--json", json, "JSON output");

  // fit
  FitConfig fit_cfg;
  std::vector<std::string> models;
  bool all = false, serial = false, timestamp = false;
  std::string se_divisor = "n_minus_p", caic_k = "p", parameterization = "transformed";
  std::string json_out, table_out;
  auto* fitc = app.add_subcommand("fit", "Fit curve families by least squares and rank them by CAIC");
  detail::add_input_flags(fitc, input);
  fitc->add_option("--model", models, "Family to fit (repeatable or comma separated)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  fitc->add_flag("--all", all, "Fit all eight families");
  fitc->add_option("--seed", fit_cfg.seed, "Multistart seed");
  fitc->add_option("--multistart", fit_cfg.multistart_count, "Latin hypercube starts per family")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--max-iterations", fit_cfg.max_iterations, "Iteration cap per start")->check(CLI::PositiveNumber);
  fitc->add_option("--gradient-tolerance", fit_cfg.gradient_tolerance, "Convergence threshold on the gradient")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--step-tolerance", fit_cfg.step_tolerance, "Relative step size that ends a start")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--se-divisor", se_divisor, "Residual variance divisor for standard errors")
      ->check(CLI::IsMember({"n", "n_minus_p"}));
  fitc->add_option("--caic-k", caic_k, "CAIC parameter count: curve parameters, or plus the residual variance")
      ->check(CLI::IsMember({"p", "p+1"}));
  fitc->add_option("--parameterization", parameterization, "Optimizer coordinates")
      ->check(CLI::IsMember({"transformed", "raw"}));
  fitc->add_flag("--serial", serial, "Fit families one after another");
  fitc->add_option("--r", r_values, "Generalized Gini orders")->delimiter(',')->check(CLI::PositiveNumber)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->expected(1, 64);
  fitc->add_option("--divisor", divisor, "Variance divisor for the dataset statistics")
      ->check(CLI::IsMember({"population", "sample"}));
  fitc->add_option("--json", json_out, "Write the JSON report to a path ('-' for stdout)");
  fitc->add_option("--table", table_out, "Write the text table to a path ('-' for stdout)");
  fitc->add_flag("--timestamp", timestamp, "Record the generation time in the JSON report");

  // indices
  detail::InputFlags idx_input;
  std::string idx_model, idx_params;
  std::vector<double> idx_r = default_r_values();
  bool idx_json = false;
  auto* idx = app.add_subcommand("indices", "Gini, generalized Gini and Pietra indices of a dataset or a model");
  detail::add_input_flags(idx, idx_input, false);
  idx->add_option("--model", idx_model, "Family of a parametric model");
  idx->add_option("--params", idx_params, "Model parameters, e.g. alpha=0.701,beta=0.102");
  idx->add_option("--r", idx_r, "Generalized Gini orders")->delimiter(',')->check(CLI::PositiveNumber)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->expected(1, 64);
  idx->add_flag("--json", idx_json, "JSON output");

  // simulate
  std::string sim_family, sim_params, sim_out = "-", mixture = "curve_consistent";
  long long sim_n = 0;
  std::uint64_t sim_seed = 1;
  double scale = 1000.0;
  auto* sim = app.add_subcommand("simulate", "Draw a synthetic citation dataset");
  sim->add_option("--family", sim_family, "power, pareto, pg or pig")->required();
  sim->add_option("--params", sim_params, "Parameters, e.g. theta=3 (pareto also takes sigma)")->required();
  sim->add_option("--n", sim_n, "Number of items")->required();
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--scale", scale, "Counts are scale * X rounded half up")->check(CLI::PositiveNumber);
  sim->add_option("--mixture", mixture, "Mixture sampling for pg and pig")
      ->check(CLI::IsMember({"curve_consistent", "per_item"}));
  sim->add_option("--out", sim_out, "Output path ('-' for stdout)");

  // export-plot
  detail::InputFlags plot_input;
  std::string models_from, plot_out = "-";
  std::size_t resolution = 101;
  auto* plot = app.add_subcommand("export-plot", "CSV of the empirical curve and fitted models for plotting");
  detail::add_input_flags(plot, plot_input);
  plot->add_option("--models-from", models_from, "JSON report whose fitted models are drawn");
  plot->add_option("--resolution", resolution, "Number of equally spaced u values")->check(CLI::Range(2, 1000000));
  plot->add_option("--out", plot_out, "Output path ('-' for stdout)");

  for (auto* sub : app.get_subcommands({})) sub->add_option("--config", config_path, "Settings file");

  try {
    // Config settings go in front of the user's flags, which therefore win.
    std::vector<std::string> argv(args);
    std::optional<std::string> cfg_file = env.config_path;
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (argv[i] == "--config" && i + 1 < argv.size()) cfg_file = argv[i + 1];
      if (argv[i].rfind("--config=", 0) == 0) cfg_file = argv[i].substr(9);
    }
    if (cfg_file) {
      const auto settings = detail::read_config(*cfg_file);
      for (std::size_t i = 0; i < argv.size(); ++i) {
        CLI::App* sub = nullptr;
        try {
          sub = app.get_subcommand(argv[i]);
        } catch (const CLI::OptionNotFound&) {
          continue;
        }
        std::vector<std::string> injected;
        for (const auto& [k, v] : settings) {
          if (sub->get_option_no_throw("--" + k) != nullptr) injected.push_back("--" + k + "=" + v);
        }
        argv.insert(argv.begin() + static_cast<std::ptrdiff_t>(i) + 1, injected.begin(), injected.end());
        break;
      }
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }

  try {
    if (*stats) {
      const auto ds = detail::load(input, env);
      const auto st = descriptive_stats(ds, divisor == "sample" ? VarianceDivisor::sample : VarianceDivisor::population);
      if (json) {
        AnalysisReport r;
        r.dataset_stats = st;
        const auto doc = nlohmann::ordered_json::parse(render_json(r));
        out << doc.at("dataset").dump(2) << "\n";
      } else {
        out << detail::stats_text(st);
      }
      return kSuccess;
    }

    if (*fitc) {
      std::vector<Family> families;
      if (all && !models.empty()) throw UsageError("give either --model or --all, not both");
      if (all) {
        families.assign(kAllFamilies.begin(), kAllFamilies.end());
      } else {
        for (const auto& m : models) {
          const Family f = detail::family_or_usage(m);
          if (std::find(families.begin(), families.end(), f) == families.end()) families.push_back(f);
        }
      }
      if (families.empty()) throw UsageError("fit needs --model <family> or --all");
      fit_cfg.variance_divisor = se_divisor == "n" ? ResidualDivisor::n : ResidualDivisor::n_minus_p;
      fit_cfg.caic_penalty =
          caic_k == "p+1" ? CaicPenalty::curve_parameters_plus_variance : CaicPenalty::curve_parameters;
      fit_cfg.parameterization = parameterization == "raw" ? Parameterization::raw : Parameterization::transformed;
      fit_cfg.parallel = !serial;
      try {
        fit_cfg.validate();
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }

      const auto ds = detail::load(input, env);
      const auto curve = empirical_curve(ds);
      ReportMetadata md;
      if (timestamp) md.generated_at = env.now ? *env.now : detail::utc_now();
      std::string tags;
      for (Family f : families) tags += (tags.empty() ? "" : ",") + std::string(family_tag(f));
      std::string rs;
      for (double r : r_values) rs += (rs.empty() ? "" : ",") + detail::number(r);
      md.config = {{"families", tags},
                   {"seed", std::to_string(fit_cfg.seed)},
                   {"multistart", std::to_string(fit_cfg.multistart_count)},
                   {"max-iterations", std::to_string(fit_cfg.max_iterations)},
                   {"gradient-tolerance", detail::number(fit_cfg.gradient_tolerance)},
                   {"step-tolerance", detail::number(fit_cfg.step_tolerance)},
                   {"se-divisor", se_divisor},
                   {"caic-k", caic_k},
                   {"parameterization", parameterization},
                   {"r", rs},
                   {"divisor", divisor}};
      const auto cmp = compare_models(curve, families, fit_cfg);
      const auto report = assemble_report(
          ds, cmp, r_values, divisor == "sample" ? VarianceDivisor::sample : VarianceDivisor::population, md);
      if (!json_out.empty()) detail::emit(json_out, render_json(report), out);
      if (!table_out.empty()) detail::emit(table_out, render_table(report), out);
      if (json_out.empty() && table_out.empty()) out << render_table(report);
      for (const auto& f : cmp.failures) err << "warning: " << family_tag(f.family) << ": " << f.message << "\n";
      const bool any_converged = std::any_of(cmp.ranked.begin(), cmp.ranked.end(),
                                             [](const FitResult& f) { return f.converged; });
      if (!any_converged) {
        err << "error: no requested fit converged\n";
        return kNumerical;
      }
      return kSuccess;
    }

    if (*idx) {
      const bool has_input = !idx_input.path.empty();
      const bool has_model = !idx_model.empty() || !idx_params.empty();
      if (has_input == has_model) throw UsageError("indices needs exactly one of an input file or --model/--params");
      IndexReport rep;
      if (has_input) {
        rep = empirical_indices(empirical_curve(detail::load(idx_input, env)), idx_r);
      } else {
        if (idx_model.empty() || idx_params.empty()) throw UsageError("--model and --params go together");
        rep = index_report(detail::model_from_flags(idx_model, idx_params), idx_r);
      }
      if (idx_json) {
        out << leimkuhler::detail::indices_json(rep).dump(2) << "\n";
      } else {
        out << detail::indices_text(rep);
      }
      return kSuccess;
    }

    if (*sim) {
      if (sim_n < 1) throw UsageError("--n must be at least 1");
      const auto p = detail::parse_assignments(sim_params);
      auto need = [&p](const char* name) {
        const auto it = p.find(name);
        if (it == p.end()) throw UsageError(std::string("missing parameter ") + name);
        return it->second;
      };
      auto only = [&p](std::initializer_list<const char*> names) {
        for (const auto& [k, v] : p) {
          if (std::none_of(names.begin(), names.end(), [&k](const char* n) { return k == n; })) {
            throw UsageError("unexpected parameter '" + k + "'");
          }
        }
      };
      SyntheticFamily family;
      if (sim_family == "power") {
        only({"theta"});
        family = SyntheticPower{need("theta")};
      } else if (sim_family == "pareto") {
        only({"theta", "sigma"});
        family = SyntheticPareto{need("theta"), p.count("sigma") ? p.at("sigma") : 1.0};
      } else if (sim_family == "pg") {
        only({"alpha", "beta"});
        family = SyntheticPG{need("alpha"), need("beta")};
      } else if (sim_family == "pig") {
        only({"alpha", "beta"});
        family = SyntheticPIG{need("alpha"), need("beta")};
      } else {
        throw UsageError("simulate supports power, pareto, pg and pig (got '" + sim_family + "')");
      }
      SyntheticOptions opts{.scale = scale,
                            .mixture = mixture == "per_item" ? MixtureSampling::per_item_parameter
                                                             : MixtureSampling::curve_consistent};
      std::string text;
      try {
        const auto ds = sample_synthetic(family, static_cast<std::size_t>(sim_n), sim_seed, opts);
        for (auto c : ds.counts_desc()) text += std::to_string(c) + "\n";
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      detail::emit(sim_out, text, out);
      return kSuccess;
    }

    if (*plot) {
      const auto curve = empirical_curve(detail::load(plot_input, env));
      std::vector<CurveModel> fitted;
      if (!models_from.empty()) {
        std::ifstream in(models_from, std::ios::binary);
        if (!in) throw IoError("cannot open " + models_from);
        std::ostringstream buf;
        buf << in.rdbuf();
        for (const auto& m : parse_report_json(buf.str()).per_model) fitted.push_back(m.fit.model);
      }
      detail::emit(plot_out, export_plot_data(curve, fitted, resolution), out);
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace leimkuhler::cli
