#pragma once

// Citation datasets: ingestion from text, the empirical Leimkuhler polygon,
// descriptive statistics and synthetic samples for round-trip tests.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/errors.hpp"

namespace leimkuhler {

/// Non-negative integer citation counts kept in descending order with cumulative sums.
class CitationDataset {
 public:
  explicit CitationDataset(std::vector<std::uint64_t> counts, std::string label = {})
      : counts_(std::move(counts)), label_(std::move(label)) {
    if (counts_.empty()) throw ValidationError("dataset is empty");
    std::sort(counts_.begin(), counts_.end(), std::greater<>());
    cumulative_.reserve(counts_.size() + 1);
    cumulative_.push_back(0);
    for (auto c : counts_) {
      if (c > std::numeric_limits<std::uint64_t>::max() - cumulative_.back()) {
        throw ValidationError("citation total overflows 64-bit integer range");
      }
      cumulative_.push_back(cumulative_.back() + c);
    }
  }

  /// Rejects negative entries before converting.
  static CitationDataset from_signed(std::span<const std::int64_t> counts, std::string label = {}) {
    std::vector<std::uint64_t> out;
    out.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] < 0) {
        throw ValidationError("negative citation count " + std::to_string(counts[i]) + " at position " +
                              std::to_string(i + 1));
      }
      out.push_back(static_cast<std::uint64_t>(counts[i]));
    }
    return CitationDataset(std::move(out), std::move(label));
  }

  std::span<const std::uint64_t> counts_desc() const { return counts_; }
  /// s_0 = 0, s_i = sum of the i largest counts.
  std::span<const std::uint64_t> cumulative() const { return cumulative_; }
  std::size_t n() const { return counts_.size(); }
  std::uint64_t total() const { return cumulative_.back(); }
  const std::string& label() const { return label_; }

  bool operator==(const CitationDataset& other) const { return counts_ == other.counts_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> cumulative_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct InputFormat {
  enum class Kind { lines, csv };
  Kind kind = Kind::lines;
  std::string column;  // csv only

  static InputFormat lines() { return {}; }
  static InputFormat csv(std::string column) { return {Kind::csv, std::move(column)}; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

enum class ParseOutcome { ok, negative, malformed };

inline ParseOutcome parse_count(std::string_view text, std::uint64_t& out) {
  text = trim(text);
  if (text.empty()) return ParseOutcome::malformed;
  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return ParseOutcome::malformed;
  if (negative && out != 0) return ParseOutcome::negative;
  return ParseOutcome::ok;
}

inline bool looks_numeric(std::string_view text) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline std::uint64_t parse_or_throw(std::string_view text, std::size_t line) {
  std::uint64_t v = 0;
  switch (parse_count(text, v)) {
    case ParseOutcome::ok: return v;
    case ParseOutcome::negative:
      throw ValidationError("line " + std::to_string(line) + ": negative citation count '" +
                            std::string(trim(text)) + "'");
    case ParseOutcome::malformed: break;
  }
  throw InputError("expected a non-negative integer, got '" + std::string(trim(text)) + "'", line);
}

// Splits one RFC-4180 record; quoted fields may contain commas, doubled quotes
// and line breaks, so the reader may consume several physical lines.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string physical;
  if (!std::getline(in, physical)) return false;
  ++line;
  const std::size_t start_line = line;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < physical.size(); ++i) {
      const char c = physical[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < physical.size() && physical[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        if (!trim(field).empty()) throw InputError("stray quote inside unquoted field", line);
        field.clear();
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\r' && i + 1 == physical.size()) {
        // CRLF line ending
      } else {
        if (was_quoted && c != ' ' && c != '\t') {
          throw InputError("unexpected text after closing quote", line);
        }
        field += c;
      }
    }
    if (!quoted) break;
    if (!std::getline(in, physical)) throw InputError("unterminated quoted field", start_line);
    ++line;
    field += '\n';
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace detail

/// Reads counts from a stream. Lines mode: one integer per line, blank lines
/// ignored, a first non-blank line that is not numeric is taken as a header.
/// CSV mode: RFC-4180 with a header row naming `format.column`.
inline CitationDataset ingest(std::istream& in, const InputFormat& format, std::string label = {}) {
  std::vector<std::uint64_t> counts;
  std::size_t line = 0;

  if (format.kind == InputFormat::Kind::lines) {
    std::string text;
    bool first_content = true;
    while (std::getline(in, text)) {
      ++line;
      const auto t = detail::trim(text);
      if (t.empty()) continue;
      if (first_content) {
        first_content = false;
        std::uint64_t v = 0;
        if (detail::parse_count(t, v) == detail::ParseOutcome::malformed && !detail::looks_numeric(t)) {
          continue;  // header
        }
      }
      counts.push_back(detail::parse_or_throw(t, line));
    }
  } else {
    if (format.column.empty()) throw InputError("CSV input needs a column name", 0);
    std::vector<std::string> fields;
    std::optional<std::size_t> index;
    std::size_t header_columns = 0;
    while (detail::read_csv_record(in, fields, line)) {
      if (fields.size() == 1 && detail::trim(fields[0]).empty()) continue;
      if (!index) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (detail::trim(fields[i]) == format.column) index = i;
        }
        if (!index) throw InputError("CSV header has no column '" + format.column + "'", line);
        header_columns = fields.size();
        continue;
      }
      if (fields.size() != header_columns) {
        throw InputError("expected " + std::to_string(header_columns) + " fields, found " +
                             std::to_string(fields.size()),
                         line);
      }
      counts.push_back(detail::parse_or_throw(fields[*index], line));
    }
    if (!index) throw ValidationError("input is empty");
  }
  if (in.bad()) throw IoError("read error");
  if (counts.empty()) throw ValidationError("input contains no citation counts");
  return CitationDataset(std::move(counts), std::move(label));
}

inline CitationDataset ingest_file(const std::filesystem::path& path, const InputFormat& format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return ingest(in, format, path.filename().string());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what(), 0);
  } catch (const DegenerateDatasetError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Empirical curve

/// The polygon through (i/n, s_i/s_n), i = 0..n.
class EmpiricalCurve {
 public:
  /// Ordinates K_0..K_n at u_i = i/n; K_0 must be 0 and K_n must be 1.
  static EmpiricalCurve from_values(std::vector<double> k_values) {
    if (k_values.size() < 2) throw DomainError("an empirical curve needs at least 2 points");
    if (k_values.front() != 0.0 || k_values.back() != 1.0) {
      throw DomainError("an empirical curve must start at 0 and end at 1");
    }
    EmpiricalCurve c;
    c.k_ = std::move(k_values);
    return c;
  }

  std::size_t source_n() const { return k_.size() - 1; }
  std::size_t size() const { return k_.size(); }
  double u(std::size_t i) const {
    return i == source_n() ? 1.0 : static_cast<double>(i) / static_cast<double>(source_n());
  }
  double k(std::size_t i) const { return k_[i]; }
  std::span<const double> k_values() const { return k_; }

  std::vector<CurvePoint> points() const {
    std::vector<CurvePoint> out(k_.size());
    for (std::size_t i = 0; i < k_.size(); ++i) out[i] = {u(i), k_[i]};
    return out;
  }

  /// Integer cumulative sums when built from counts.
  const std::optional<std::vector<std::uint64_t>>& cumulative() const { return cumulative_; }

  /// Linear interpolation at u = j / (m - 1). Exact at the knots: when j/(m-1)
  /// equals i/n the stored K_i is returned unchanged.
  double at_grid(std::size_t j, std::size_t m) const {
    const std::size_t n = source_n();
    const std::size_t den = m - 1;
    // u * n = j * n / den with quotient and remainder in integers.
    const auto num = static_cast<unsigned long long>(j) * n;  // grid and sample sizes stay far below 2^32
    const auto i = static_cast<std::size_t>(num / den);
    const auto rem = static_cast<std::size_t>(num % den);
    if (rem == 0) return k_[i];
    if (cumulative_) {
      const auto& s = *cumulative_;
      const double total = static_cast<double>(s.back());
      const long double kk = static_cast<long double>(s[i]) +
                             static_cast<long double>(s[i + 1] - s[i]) * rem / den;
      return static_cast<double>(kk / total);
    }
    const double w = static_cast<double>(rem) / static_cast<double>(den);
    return k_[i] + (k_[i + 1] - k_[i]) * w;
  }

 private:
  friend EmpiricalCurve empirical_curve(const CitationDataset& ds);
  std::vector<double> k_;
  std::optional<std::vector<std::uint64_t>> cumulative_;
};

inline EmpiricalCurve empirical_curve(const CitationDataset& ds) {
  if (ds.total() == 0) throw DegenerateDatasetError("all citation counts are zero; the curve is undefined");
  const auto s = ds.cumulative();
  EmpiricalCurve c;
  c.k_.resize(s.size());
  const double total = static_cast<double>(ds.total());
  for (std::size_t i = 0; i < s.size(); ++i) c.k_[i] = static_cast<double>(s[i]) / total;
  c.k_.back() = 1.0;
  c.cumulative_.emplace(s.begin(), s.end());
  return c;
}

// ---------------------------------------------------------------------------
// Descriptive statistics

enum class VarianceDivisor { population, sample };

struct DescriptiveStats {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> dispersion_index;  // variance / mean; empty when mean = 0
  std::uint64_t total = 0;
  std::size_t n = 0;
  VarianceDivisor divisor = VarianceDivisor::population;

  bool operator==(const DescriptiveStats&) const = default;
};

inline std::optional<double> dispersion_index(double variance, double mean) {
  if (!(mean > 0.0)) return std::nullopt;
  return variance / mean;
}

inline DescriptiveStats descriptive_stats(const CitationDataset& ds,
                                          VarianceDivisor divisor = VarianceDivisor::population) {
  DescriptiveStats st;
  const auto c = ds.counts_desc();
  st.n = ds.n();
  st.total = ds.total();
  st.max = c.front();
  st.min = c.back();
  st.divisor = divisor;
  st.mean = static_cast<double>(st.total) / static_cast<double>(st.n);
  long double ss = 0.0L;
  for (auto x : c) {
    const long double d = static_cast<long double>(x) - st.mean;
    ss += d * d;
  }
  const std::size_t den = divisor == VarianceDivisor::population ? st.n : st.n - 1;
  st.variance = den == 0 ? 0.0 : static_cast<double>(ss / den);
  st.dispersion_index = dispersion_index(st.variance, st.mean);
  return st;
}

// ---------------------------------------------------------------------------
// Synthetic samples

struct SyntheticPower {
  double theta;
};
struct SyntheticPareto {
  double theta;
  double sigma = 1.0;
};
struct SyntheticPG {
  double alpha, beta;
};
struct SyntheticPIG {
  double alpha, beta;
};
using SyntheticFamily = std::variant<SyntheticPower, SyntheticPareto, SyntheticPG, SyntheticPIG>;

/// How PG and PIG samples draw their shape parameter.
///  - curve_consistent: one draw per item from the law whose Leimkuhler curve
///    is the mixture curve (inversion of its quantile, known up to scale).
///  - per_item_parameter: theta ~ mixing law, then X = U^theta per item.
enum class MixtureSampling { curve_consistent, per_item_parameter };

struct SyntheticOptions {
  double scale = 1000.0;
  MixtureSampling mixture = MixtureSampling::curve_consistent;
};

/// Uniform (0,1) variates from a 64-bit Mersenne twister; never returns 0 or 1.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

template <class Uniform>
double standard_normal(Uniform& next) {
  // Box-Muller, one variate per call.
  const double r = std::sqrt(-2.0 * std::log(next()));
  return r * std::cos(2.0 * std::numbers::pi * next());
}

// Marsaglia-Tsang with the shape < 1 boost.
template <class Uniform>
double gamma_variate(double shape, double rate, Uniform& next) {
  if (shape < 1.0) {
    const double g = gamma_variate(shape + 1.0, 1.0, next);
    return g * std::pow(next(), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(next);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

// Michael, Schucany and Haas transformation method.
template <class Uniform>
double inverse_gaussian_variate(double mean, double shape, Uniform& next) {
  const double nu = standard_normal(next);
  const double y = nu * nu;
  const double x = mean + mean * mean * y / (2.0 * shape) -
                   mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  return next() <= mean / (mean + x) ? x : mean * mean / x;
}

// The mixture curve is K(u) = 1 - c(1 - u) with c(v) = v psi(log v); a random
// variable with that curve has quantile proportional to c'(v) at v = 1 - y.
// Normalizing by c'(1) gives values in (0, 1].
inline double pg_relative_size(double alpha, double beta, double v) {
  const double lv = std::log(v);
  const double psi = std::pow(beta / (beta - lv), alpha);
  return psi * (1.0 + alpha / (beta - lv)) / (1.0 + alpha / beta);
}

inline double pig_relative_size(double alpha, double beta, double v) {
  const double lv = std::log(v);
  const double root = std::sqrt(1.0 - 2.0 * alpha * alpha * lv / beta);
  const double psi = std::exp((beta / alpha) * (1.0 - root));
  return psi * (1.0 + alpha / root) / (1.0 + alpha);
}

inline std::uint64_t round_half_up(double x) {
  constexpr double kExactLimit = 9007199254740992.0;  // 2^53
  const double r = std::floor(x + 0.5);
  if (!(r >= 0.0) || r > kExactLimit) {
    throw DomainError("synthetic value " + std::to_string(x) +
                      " exceeds the exactly representable integer range; reduce the scale");
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace detail

/// Draws n synthetic citation counts, scale * X rounded half-up, using the
/// supplied uniform(0,1) source.
template <class Uniform>
  requires std::invocable<Uniform&>
CitationDataset sample_synthetic(const SyntheticFamily& family, std::size_t n, Uniform&& next,
                                 const SyntheticOptions& options = {}) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  if (!(options.scale > 0.0) || !std::isfinite(options.scale)) throw DomainError("scale must be positive");

  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SyntheticPower>) {
          positive(f.theta, "theta");
        } else if constexpr (std::is_same_v<T, SyntheticPareto>) {
          if (!(f.theta > 0.0 && f.theta < 1.0)) throw DomainError("Pareto theta must lie in (0, 1)");
          positive(f.sigma, "sigma");
        } else {
          positive(f.alpha, "alpha");
          positive(f.beta, "beta");
        }
      },
      family);

  std::vector<std::uint64_t> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, SyntheticPower>) {
            return std::pow(next(), f.theta);
          } else if constexpr (std::is_same_v<T, SyntheticPareto>) {
            return f.sigma * std::pow(1.0 - next(), -f.theta);
          } else if constexpr (std::is_same_v<T, SyntheticPG>) {
            if (options.mixture == MixtureSampling::curve_consistent) {
              return detail::pg_relative_size(f.alpha, f.beta, next());
            }
            const double theta = detail::gamma_variate(f.alpha, f.beta, next);
            return std::pow(next(), theta);
          } else {
            if (options.mixture == MixtureSampling::curve_consistent) {
              return detail::pig_relative_size(f.alpha, f.beta, next());
            }
            const double theta = detail::inverse_gaussian_variate(f.alpha, f.beta, next);
            return std::pow(next(), theta);
          }
        },
        family);
    counts[i] = detail::round_half_up(options.scale * x);
  }
  return CitationDataset(std::move(counts), "synthetic");
}

inline CitationDataset sample_synthetic(const SyntheticFamily& family, std::size_t n, std::uint64_t seed,
                                        const SyntheticOptions& options = {}) {
  UniformSource source(seed);
  return sample_synthetic(family, n, source, options);
}

}  // namespace leimkuhler
