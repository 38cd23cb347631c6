#pragma once

// JSON, text-table and plot-CSV renderings of an analysis.

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/empirical.hpp"
#include "leimkuhler/errors.hpp"
#include "leimkuhler/fit.hpp"
#include "leimkuhler/indices.hpp"

namespace leimkuhler {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolName = "leimkuhler";
inline constexpr const char* kToolVersion = "0.1.0";

struct ModelReport {
  FitResult fit;
  std::optional<IndexReport> indices;  // empty when an index computation failed
};

struct ReportMetadata {
  std::string tool_version = kToolVersion;
  std::optional<std::string> generated_at;
  std::string input;
  std::vector<std::pair<std::string, std::string>> config;  // echoed settings, in order
};

struct AnalysisReport {
  DescriptiveStats dataset_stats;
  IndexReport empirical_indices;
  std::vector<ModelReport> per_model;  // in ranking order
  std::vector<Family> ranking;
  std::vector<FitFailure> failures;
  ReportMetadata metadata;
};

namespace detail {

using ojson = nlohmann::ordered_json;

// Rounds to 12 significant digits; the JSON writer prints the shortest form
// that reads back to the rounded double.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline ojson real(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return round12(x);
}

inline ojson real(const std::optional<double>& x) { return x ? real(*x) : ojson(nullptr); }

inline double read_real(const ojson& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw ValidationError("unexpected string for a number: " + s);
  }
  return j.get<double>();
}

inline ojson indices_json(const IndexReport& r) {
  ojson g = ojson::array();
  for (const auto& x : r.generalized_gini) {
    g.push_back({{"r", real(x.r)}, {"value", real(x.value)}, {"method", to_string(x.method)}});
  }
  return {{"gini", {{"value", real(r.gini.value)}, {"method", to_string(r.gini.method)}}},
          {"generalized_gini", g},
          {"pietra",
           {{"value", real(r.pietra.value)},
            {"argmax_u", real(r.pietra.argmax_u)},
            {"method", to_string(r.pietra.method)}}}};
}

inline IndexMethod read_method(const ojson& j) {
  const auto m = parse_index_method(j.get<std::string>());
  if (!m) throw ValidationError("unknown index method " + j.get<std::string>());
  return *m;
}

inline IndexReport read_indices(const ojson& j) {
  IndexReport r;
  r.gini = {read_real(j.at("gini").at("value")), read_method(j.at("gini").at("method"))};
  for (const auto& g : j.at("generalized_gini")) {
    r.generalized_gini.push_back({read_real(g.at("r")), read_real(g.at("value")), read_method(g.at("method"))});
  }
  const auto& p = j.at("pietra");
  r.pietra = {read_real(p.at("value")), read_real(p.at("argmax_u")), read_method(p.at("method"))};
  return r;
}

inline ojson fit_json(const FitResult& f) {
  const auto specs = param_specs(f.model.family());
  const auto values = f.model.values();
  ojson params = ojson::object(), errors = nullptr;
  for (std::size_t j = 0; j < specs.size(); ++j) params[std::string(param_name(specs[j].id))] = real(values[j]);
  if (f.std_errors) {
    errors = ojson::object();
    for (std::size_t j = 0; j < specs.size(); ++j) {
      errors[std::string(param_name(specs[j].id))] = real((*f.std_errors)[j]);
    }
  }
  ojson history = ojson::array();
  for (double h : f.objective_history) history.push_back(real(h));
  return {{"family", family_tag(f.model.family())},
          {"params", params},
          {"std_errors", errors},
          {"n", f.n},
          {"sse", real(f.sse)},
          {"mse", real(f.mse)},
          {"max_abs", real(f.max_abs)},
          {"mae", real(f.mae)},
          {"caic", real(f.caic)},
          {"converged", f.converged},
          {"at_boundary", f.at_boundary},
          {"iterations", f.iterations},
          {"starts", f.starts},
          {"gradient_norm", real(f.gradient_norm)},
          {"message", f.message},
          {"objective_history", history}};
}

inline Family read_family(const ojson& j) {
  const auto f = parse_family(j.get<std::string>());
  if (!f) throw ValidationError("unknown family " + j.get<std::string>());
  return *f;
}

inline FitResult read_fit(const ojson& j) {
  const Family family = read_family(j.at("family"));
  const auto specs = param_specs(family);
  std::vector<double> values;
  for (const auto& s : specs) values.push_back(read_real(j.at("params").at(std::string(param_name(s.id)))));
  FitResult f{.model = CurveModel::from_values(family, values)};
  if (!j.at("std_errors").is_null()) {
    std::vector<double> se;
    for (const auto& s : specs) se.push_back(read_real(j.at("std_errors").at(std::string(param_name(s.id)))));
    f.std_errors = std::move(se);
  }
  f.n = j.at("n").get<std::size_t>();
  f.sse = read_real(j.at("sse"));
  f.mse = read_real(j.at("mse"));
  f.max_abs = read_real(j.at("max_abs"));
  f.mae = read_real(j.at("mae"));
  f.caic = read_real(j.at("caic"));
  f.converged = j.at("converged").get<bool>();
  f.at_boundary = j.at("at_boundary").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  f.starts = j.at("starts").get<int>();
  f.gradient_norm = read_real(j.at("gradient_norm"));
  f.message = j.at("message").get<std::string>();
  for (const auto& h : j.at("objective_history")) f.objective_history.push_back(read_real(h));
  return f;
}

}  // namespace detail

/// Deterministic JSON document: fixed key order, reals to 12 significant
/// digits, null for unavailable values and "-inf" for a perfect-fit CAIC.
inline std::string render_json(const AnalysisReport& report) {
  using detail::ojson;
  using detail::real;
  const auto& st = report.dataset_stats;
  ojson config = ojson::object();
  for (const auto& [k, v] : report.metadata.config) config[k] = v;

  ojson models = ojson::array();
  for (const auto& m : report.per_model) {
    models.push_back({{"fit", detail::fit_json(m.fit)},
                      {"indices", m.indices ? detail::indices_json(*m.indices) : ojson(nullptr)}});
  }
  ojson ranking = ojson::array();
  for (Family f : report.ranking) ranking.push_back(family_tag(f));
  ojson failures = ojson::array();
  for (const auto& f : report.failures) failures.push_back({{"family", family_tag(f.family)}, {"message", f.message}});

  const ojson doc = {
      {"schema_version", kReportSchemaVersion},
      {"metadata",
       {{"tool", kToolName},
        {"version", report.metadata.tool_version},
        {"generated_at", report.metadata.generated_at ? ojson(*report.metadata.generated_at) : ojson(nullptr)},
        {"input", report.metadata.input},
        {"config", config}}},
      {"dataset",
       {{"n", st.n},
        {"total", st.total},
        {"min", st.min},
        {"max", st.max},
        {"mean", real(st.mean)},
        {"variance", real(st.variance)},
        {"variance_divisor", st.divisor == VarianceDivisor::population ? "population" : "sample"},
        {"dispersion_index", real(st.dispersion_index)}}},
      {"empirical_indices", detail::indices_json(report.empirical_indices)},
      {"models", models},
      {"ranking", ranking},
      {"failures", failures}};
  return doc.dump(2) + "\n";
}

/// Inverse of render_json. Throws ValidationError on malformed documents or
/// an unsupported schema version.
inline AnalysisReport parse_report_json(std::string_view text) {
  using detail::ojson;
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("schema_version")) throw ValidationError("report has no schema_version");
    const int version = doc.at("schema_version").get<int>();
    if (version != kReportSchemaVersion) {
      throw ValidationError("unsupported report schema version " + std::to_string(version) + " (expected " +
                            std::to_string(kReportSchemaVersion) + ")");
    }
    AnalysisReport r;
    const auto& md = doc.at("metadata");
    r.metadata.tool_version = md.at("version").get<std::string>();
    if (!md.at("generated_at").is_null()) r.metadata.generated_at = md.at("generated_at").get<std::string>();
    r.metadata.input = md.at("input").get<std::string>();
    for (const auto& [k, v] : md.at("config").items()) r.metadata.config.emplace_back(k, v.get<std::string>());

    const auto& ds = doc.at("dataset");
    auto& st = r.dataset_stats;
    st.n = ds.at("n").get<std::size_t>();
    st.total = ds.at("total").get<std::uint64_t>();
    st.min = ds.at("min").get<std::uint64_t>();
    st.max = ds.at("max").get<std::uint64_t>();
    st.mean = detail::read_real(ds.at("mean"));
    st.variance = detail::read_real(ds.at("variance"));
    st.divisor = ds.at("variance_divisor").get<std::string>() == "sample" ? VarianceDivisor::sample
                                                                         : VarianceDivisor::population;
    if (!ds.at("dispersion_index").is_null()) st.dispersion_index = detail::read_real(ds.at("dispersion_index"));

    r.empirical_indices = detail::read_indices(doc.at("empirical_indices"));
    for (const auto& m : doc.at("models")) {
      ModelReport mr{.fit = detail::read_fit(m.at("fit")), .indices = std::nullopt};
      if (!m.at("indices").is_null()) mr.indices = detail::read_indices(m.at("indices"));
      r.per_model.push_back(std::move(mr));
    }
    for (const auto& f : doc.at("ranking")) r.ranking.push_back(detail::read_family(f));
    for (const auto& f : doc.at("failures")) {
      r.failures.push_back({detail::read_family(f.at("family")), f.at("message").get<std::string>()});
    }
    return r;
  } catch (const ojson::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

/// Gathers statistics, empirical indices and per-model indices at the fitted
/// parameters into a report. Models keep the comparison's ranking order.
inline AnalysisReport assemble_report(const CitationDataset& data, const Comparison& comparison,
                                      const std::vector<double>& r_values = default_r_values(),
                                      VarianceDivisor divisor = VarianceDivisor::population,
                                      ReportMetadata metadata = {}) {
  AnalysisReport r;
  r.dataset_stats = descriptive_stats(data, divisor);
  r.empirical_indices = empirical_indices(empirical_curve(data), r_values);
  for (const auto& f : comparison.ranked) {
    ModelReport m{.fit = f, .indices = std::nullopt};
    try {
      m.indices = index_report(f.model, r_values);
    } catch (const Error&) {
    }
    r.ranking.push_back(f.model.family());
    r.per_model.push_back(std::move(m));
  }
  r.failures = comparison.failures;
  if (metadata.input.empty()) metadata.input = data.label();
  r.metadata = std::move(metadata);
  return r;
}

namespace detail {

inline std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline std::string metric_cell(double x) {
  if (std::isnan(x)) return "n/a";
  return x != 0.0 && std::abs(x) < 1e-3 ? fmt("%.1e", x) : fmt("%.4f", x);
}

inline std::string param_cell(double x) { return std::abs(x) >= 1e5 ? fmt("%.3e", x) : fmt("%.3f", x); }

inline std::string error_cell(double x) {
  return "(" + (std::abs(x) >= 1e5 ? fmt("%.3e", x) : fmt("%.4f", x)) + ")";
}

inline std::string caic_cell(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  return fmt("%.2f", x);
}

}  // namespace detail

/// Fixed-width table, one row per model with standard errors in parentheses
/// on the row beneath.
inline std::string render_table(const AnalysisReport& report) {
  static constexpr ParamId kColumns[] = {ParamId::theta, ParamId::kappa, ParamId::alpha, ParamId::beta,
                                         ParamId::shift};
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Model", "theta", "kappa", "alpha", "beta", "shift", "MSE", "MAX", "MAE", "CAIC", "Gini", "Pietra"});
  for (const auto& m : report.per_model) {
    const auto& f = m.fit;
    std::vector<std::string> est{std::string(family_name(f.model.family())) + (f.converged ? "" : "*")};
    std::vector<std::string> err{""};
    const auto specs = param_specs(f.model.family());
    for (ParamId id : kColumns) {
      const auto& v = f.model.params()[id];
      est.push_back(v ? detail::param_cell(*v) : "");
      std::string e;
      if (v) {
        const auto pos = std::find_if(specs.begin(), specs.end(), [id](const ParamSpec& s) { return s.id == id; });
        const auto j = static_cast<std::size_t>(pos - specs.begin());
        e = f.std_errors ? detail::error_cell((*f.std_errors)[j]) : "(n/a)";
      }
      err.push_back(e);
    }
    est.push_back(detail::metric_cell(f.mse));
    est.push_back(detail::metric_cell(f.max_abs));
    est.push_back(detail::metric_cell(f.mae));
    est.push_back(detail::caic_cell(f.caic));
    est.push_back(m.indices ? detail::fmt("%.4f", m.indices->gini.value) : "n/a");
    est.push_back(m.indices ? detail::fmt("%.4f", m.indices->pietra.value) : "n/a");
    err.resize(est.size());
    rows.push_back(std::move(est));
    rows.push_back(std::move(err));
  }

  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::size_t pad = width[c] - r[c].size();
      if (c == 0) {
        line += r[c] + std::string(pad, ' ');
      } else {
        line += "  " + std::string(pad, ' ') + r[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  emit(rows[0]);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + "\n";
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  if (report.per_model.empty()) out += "(no fitted models)\n";
  const bool any_unconverged = std::any_of(report.per_model.begin(), report.per_model.end(),
                                           [](const ModelReport& m) { return !m.fit.converged; });
  if (any_unconverged) out += "* not converged or at the edge of the parameter box\n";
  return out;
}

namespace detail {

inline void append_number(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// CSV with columns u, empirical, one K column per model and one residual
/// column (empirical - model) per model, on `resolution` equally spaced u.
inline std::string export_plot_data(const EmpiricalCurve& curve, const std::vector<CurveModel>& models,
                                    std::size_t resolution) {
  if (resolution < 2) throw DomainError("plot resolution must be at least 2");
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (const auto& m : models) {
    std::string tag(family_tag(m.family()));
    const int k = ++seen[tag];
    names.push_back(k == 1 ? tag : tag + "_" + std::to_string(k));
  }
  std::string out = "u,empirical";
  for (const auto& n : names) out += "," + n;
  for (const auto& n : names) out += ",residual_" + n;
  out += "\n";

  std::vector<double> fitted(models.size());
  for (std::size_t j = 0; j < resolution; ++j) {
    const double u = j + 1 == resolution ? 1.0 : static_cast<double>(j) / static_cast<double>(resolution - 1);
    const double emp = curve.at_grid(j, resolution);
    detail::append_number(out, u);
    out += ',';
    detail::append_number(out, emp);
    for (std::size_t m = 0; m < models.size(); ++m) {
      fitted[m] = models[m].evaluate(u);
      out += ',';
      detail::append_number(out, fitted[m]);
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      out += ',';
      detail::append_number(out, emp - fitted[m]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace leimkuhler
