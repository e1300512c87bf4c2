#pragma once

// Declarative parameter sweeps over one or two axes.
//
// A sweep document is a parameter document (config.hpp) plus
//
//   sweep.axis1.name  = xi_c_over_omega_b
//   sweep.axis1.min   = 0
//   sweep.axis1.max   = 0.1
//   sweep.axis1.count = 61
//   sweep.axis2.*     = ...            # optional second axis
//   sweep.outputs     = r_max, stability
//   sweep.samples_per_period = 256
//
// Grid points are row-major with axis1 outermost. Results are written by
// grid index, so the output does not depend on the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "magnomech/config.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/params.hpp"
#include "magnomech/pipeline.hpp"
#include "magnomech/version.hpp"

namespace magnomech {

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  double value(std::size_t k) const {
    if (k + 1 == count) return max;
    return min + (max - min) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
};

/// Output column groups, in emission order.
inline const std::vector<std::string>& output_groups() {
  static const std::vector<std::string> groups = {"r_max",      "entanglement", "stability",
                                                  "physicality", "max_abs_a",    "wall_time"};
  return groups;
}

inline std::vector<std::string> group_columns(const std::string& group) {
  if (group == "r_max") return {"r_max", "t_max"};
  if (group == "entanglement") return {"en_ab", "en_am", "en_bm", "en_a_bm", "en_b_am", "en_m_ab"};
  if (group == "stability") return {"routh_hurwitz", "floquet", "max_re_eig", "spectral_radius"};
  if (group == "physicality") return {"physical", "monogamy_ok"};
  if (group == "max_abs_a") return {"max_abs_a"};
  if (group == "wall_time") return {"wall_time"};
  throw ParseError("unknown output '" + group + "'");
}

struct SweepSpec {
  SystemParams base;
  std::vector<SweepAxis> axes;
  /// Subset of output_groups(), kept in canonical order.
  std::vector<std::string> outputs = {"r_max", "entanglement", "stability", "physicality",
                                      "max_abs_a"};
  std::size_t samples_per_period = 256;

  std::size_t point_count() const {
    std::size_t n = 1;
    for (const SweepAxis& a : axes) n *= a.count;
    return n;
  }

  std::vector<double> coordinates(std::size_t index) const {
    std::vector<double> c(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      c[k] = axes[k].value(index % axes[k].count);
      index /= axes[k].count;
    }
    return c;
  }

  SystemParams point(std::size_t index) const {
    const std::vector<double> c = coordinates(index);
    SystemParams p = base;
    // delta_theta is relative to theta_c, so it goes last.
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (axes[k].name != "delta_theta") set_coordinate(p, axes[k].name, c[k]);
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (axes[k].name == "delta_theta") set_coordinate(p, axes[k].name, c[k]);
    }
    return p;
  }

  std::vector<std::string> columns() const {
    std::vector<std::string> cols;
    for (const SweepAxis& a : axes) cols.push_back(a.name);
    cols.push_back("status");
    for (const std::string& g : outputs) {
      for (std::string& c : group_columns(g)) cols.push_back(std::move(c));
    }
    return cols;
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item(trim(std::string_view(s).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

/// Canonical text of a spec; identical specs hash identically regardless of
/// key order or formatting in the source document.
inline std::string canonical_text(const SweepSpec& s) {
  std::ostringstream o;
  o.precision(17);
  const SystemParams& p = s.base;
  o << "omega_b_si=" << p.omega_b_si << "\nomega_d_si=" << p.omega_d_si;
  if (p.omega_a_si) o << "\nomega_a_si=" << *p.omega_a_si;
  if (p.omega_s_si) o << "\nomega_s_si=" << *p.omega_s_si;
  if (p.omega_c_si) o << "\nomega_c_si=" << *p.omega_c_si;
  o << "\nomega_b=" << p.omega_b << "\ndelta_a=" << p.delta_a << "\ndelta_s=" << p.delta_s
    << "\nomega_c_prime=" << p.omega_c_prime << "\nomega_m=" << p.omega_m << "\ng=" << p.g
    << "\nlambda=" << p.lambda << "\nkappa_a=" << p.kappa_a << "\nkappa_m=" << p.kappa_m
    << "\ngamma_b=" << p.gamma_b << "\nxi_c=" << p.xi_c << "\nxi_m=" << p.xi_m
    << "\ntheta_c=" << p.theta_c << "\ntheta_m=" << p.theta_m << "\nepsilon_d=" << p.epsilon_d
    << "\ntemperature=" << p.temperature;
  for (std::size_t k = 0; k < s.axes.size(); ++k) {
    const SweepAxis& a = s.axes[k];
    o << "\naxis" << k + 1 << "=" << a.name << "," << a.min << "," << a.max << "," << a.count;
  }
  o << "\noutputs=";
  for (const std::string& g : s.outputs) o << g << ";";
  o << "\nsamples_per_period=" << s.samples_per_period << "\n";
  return o.str();
}

inline std::string spec_hash(const SweepSpec& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(canonical_text(s))));
  return buf;
}

/// Parses and validates a sweep document. Every grid point is checked
/// (parameter validity, commensurate drive frequencies) before any work.
inline SweepSpec parse_spec(std::string_view text) {
  struct AxisKeys {
    std::optional<KeyValue> name, min, max, count;
  };
  AxisKeys axis_keys[2];
  std::optional<KeyValue> outputs, samples;

  SweepSpec spec;
  spec.base = params_from_entries(parse_key_values(text), [&](const KeyValue& kv) {
    const std::string_view key = kv.key;
    if (key == "sweep.outputs") {
      outputs = kv;
      return;
    }
    if (key == "sweep.samples_per_period") {
      samples = kv;
      return;
    }
    for (int a = 0; a < 2; ++a) {
      const std::string prefix = "sweep.axis" + std::to_string(a + 1) + ".";
      if (key.substr(0, prefix.size()) != prefix) continue;
      const std::string_view field = key.substr(prefix.size());
      if (field == "name") axis_keys[a].name = kv;
      else if (field == "min") axis_keys[a].min = kv;
      else if (field == "max") axis_keys[a].max = kv;
      else if (field == "count") axis_keys[a].count = kv;
      else break;
      return;
    }
    throw ParseError(detail::at_line(kv.line) + "unknown key '" + kv.key + "'");
  });

  for (int a = 0; a < 2; ++a) {
    const AxisKeys& k = axis_keys[a];
    const std::string label = "sweep.axis" + std::to_string(a + 1);
    const bool any = k.name || k.min || k.max || k.count;
    if (!any) continue;
    if (!(k.name && k.min && k.max && k.count)) {
      throw ParseError(label + ": name, min, max and count are all required");
    }
    if (a == 1 && spec.axes.empty()) throw ParseError("sweep.axis2 given without sweep.axis1");
    SweepAxis axis;
    axis.name = k.name->value;
    if (!is_sweepable(axis.name)) {
      throw ParseError(detail::at_line(k.name->line) + "unknown parameter '" + axis.name + "'");
    }
    axis.min = parse_number(*k.min);
    axis.max = parse_number(*k.max);
    const long long count = parse_integer(*k.count);
    if (!std::isfinite(axis.min) || !std::isfinite(axis.max) || !(axis.max > axis.min)) {
      throw ParseError(label + ": malformed range [" + k.min->value + ", " + k.max->value +
                       "], need min < max");
    }
    if (count < 2) {
      throw ParseError(detail::at_line(k.count->line) + label + ".count must be >= 2, got " +
                       k.count->value);
    }
    axis.count = static_cast<std::size_t>(count);
    for (const SweepAxis& other : spec.axes) {
      if (other.name == axis.name) throw ParseError("axis '" + axis.name + "' given twice");
    }
    spec.axes.push_back(axis);
  }
  if (spec.axes.empty()) throw ParseError("sweep.axis1 is required");

  if (outputs) {
    const std::vector<std::string> requested = detail::split_list(outputs->value);
    if (requested.empty()) throw ParseError(detail::at_line(outputs->line) + "empty output list");
    for (const std::string& r : requested) {
      if (std::find(output_groups().begin(), output_groups().end(), r) == output_groups().end()) {
        throw ParseError(detail::at_line(outputs->line) + "unknown output '" + r + "'");
      }
    }
    spec.outputs.clear();
    for (const std::string& g : output_groups()) {
      if (std::find(requested.begin(), requested.end(), g) != requested.end()) {
        spec.outputs.push_back(g);
      }
    }
  }
  if (samples) {
    const long long n = parse_integer(*samples);
    if (n < 3) throw ParseError(detail::at_line(samples->line) + "samples_per_period must be >= 3");
    spec.samples_per_period = static_cast<std::size_t>(n);
  }

  for (std::size_t i = 0; i < spec.point_count(); ++i) {
    const SystemParams p = spec.point(i);
    auto where = [&] {
      std::string s = "grid point (";
      const std::vector<double> c = spec.coordinates(i);
      for (std::size_t k = 0; k < c.size(); ++k) {
        s += (k ? ", " : "") + spec.axes[k].name + "=" + detail::format_double(c[k]);
      }
      return s + ")";
    };
    try {
      validate(p);
      if (p.opa_active() && p.mpa_active()) common_period(p);
    } catch (const Error& e) {
      throw ParseError(where() + ": " + e.what());
    }
  }
  return spec;
}

inline SweepSpec load_spec(const std::string& path) {
  try {
    return parse_spec(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

struct PointRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> coordinates;
  /// stable | rh_violated | unstable_floquet | error:<kind>
  std::string status;
  std::string message;
  double r_max = nan;
  double t_max = nan;
  /// (a,b), (a,m), (b,m), then a|bm, b|am, m|ab.
  std::array<double, 6> logneg{nan, nan, nan, nan, nan, nan};
  std::optional<bool> routh_hurwitz;
  std::optional<bool> floquet;
  double max_re_eig = nan;
  double spectral_radius = nan;
  std::optional<bool> physical;
  std::optional<bool> monogamy_ok;
  double max_abs_a = nan;
  double wall_time = nan;

  /// Values for the given column, rendered as CSV text.
  std::string cell(const std::string& column) const;
};

namespace detail {

inline std::string format_flag(const std::optional<bool>& b) {
  if (!b) return "nan";
  return *b ? "1" : "0";
}

}  // namespace detail

inline std::string PointRecord::cell(const std::string& c) const {
  using detail::format_double;
  using detail::format_flag;
  if (c == "status") return status;
  if (c == "r_max") return format_double(r_max);
  if (c == "t_max") return format_double(t_max);
  static const char* en[] = {"en_ab", "en_am", "en_bm", "en_a_bm", "en_b_am", "en_m_ab"};
  for (int k = 0; k < 6; ++k) {
    if (c == en[k]) return format_double(logneg[k]);
  }
  if (c == "routh_hurwitz") return format_flag(routh_hurwitz);
  if (c == "floquet") return format_flag(floquet);
  if (c == "max_re_eig") return format_double(max_re_eig);
  if (c == "spectral_radius") return format_double(spectral_radius);
  if (c == "physical") return format_flag(physical);
  if (c == "monogamy_ok") return format_flag(monogamy_ok);
  if (c == "max_abs_a") return format_double(max_abs_a);
  if (c == "wall_time") return format_double(wall_time);
  throw DomainError("unknown column '" + c + "'");
}

/// Runs the full pipeline at one point. Never throws for physics failures:
/// they are recorded in `status`.
inline PointRecord evaluate_point(const SystemParams& p, std::size_t samples_per_period) {
  PointRecord r;
  const auto start = std::chrono::steady_clock::now();
  try {
    PipelineOptions opt;
    opt.period.n_samples = samples_per_period;
    const PointAnalysis a = analyze_point(p, opt);
    r.routh_hurwitz = a.stability.routh_hurwitz;
    r.floquet = a.stability.floquet;
    r.max_re_eig = a.stability.max_real_eigenvalue;
    r.spectral_radius = a.stability.spectral_radius;
    if (a.summary) {
      r.status = a.stability.routh_hurwitz ? "stable" : "rh_violated";
      r.r_max = a.summary->r_max;
      r.t_max = a.summary->t_max;
      for (int k = 0; k < 3; ++k) {
        r.logneg[k] = a.summary->at_max.pairwise_logneg[k];
        r.logneg[3 + k] = a.summary->at_max.one_vs_two_logneg[k];
      }
      r.physical = a.summary->physical;
      r.monogamy_ok = a.summary->monogamy_ok;
      r.max_abs_a = a.max_abs_a();
    } else {
      r.status = "unstable_floquet";
    }
  } catch (const InstabilityError& e) {
    r.status = "unstable_floquet";
    r.message = e.what();
    r.floquet = false;
    r.spectral_radius = e.spectral_radius();
  } catch (const Error& e) {
    r.status = std::string("error:") + to_string(e.kind());
    r.message = e.what();
  } catch (const std::exception& e) {
    r.status = "error:internal";
    r.message = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<PointRecord> records;
  std::string version = kVersion;
  std::string spec_hash;
};

/// Evaluates every grid point with `jobs` workers (0 = hardware threads).
inline SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  SweepResult result;
  result.columns = spec.columns();
  result.spec_hash = spec_hash(spec);
  const std::size_t n = spec.point_count();
  result.records.resize(n);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      PointRecord r = evaluate_point(spec.point(i), spec.samples_per_period);
      r.coordinates = spec.coordinates(i);
      result.records[i] = std::move(r);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return result;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string provenance_line(const SweepResult& r, const std::string& generated) {
  return "# magnomech " + r.version + " spec_hash=" + r.spec_hash + " generated=" + generated;
}

/// Header row followed by one row per record.
inline std::string csv_body(const SweepResult& r) {
  std::string out;
  for (std::size_t k = 0; k < r.columns.size(); ++k) out += (k ? "," : "") + r.columns[k];
  out += "\n";
  const std::size_t n_axes =
      static_cast<std::size_t>(std::find(r.columns.begin(), r.columns.end(), "status") -
                               r.columns.begin());
  for (const PointRecord& rec : r.records) {
    for (std::size_t k = 0; k < r.columns.size(); ++k) {
      if (k) out += ",";
      out += k < n_axes ? detail::format_double(rec.coordinates.at(k)) : rec.cell(r.columns[k]);
    }
    out += "\n";
  }
  return out;
}

inline std::string to_csv(const SweepResult& r, const std::string& generated = utc_timestamp()) {
  return provenance_line(r, generated) + "\n" + csv_body(r);
}

inline nlohmann::json to_json(const SweepResult& r,
                              const std::string& generated = utc_timestamp()) {
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t n_axes =
      static_cast<std::size_t>(std::find(r.columns.begin(), r.columns.end(), "status") -
                               r.columns.begin());
  for (const PointRecord& rec : r.records) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t k = 0; k < r.columns.size(); ++k) {
      const std::string& c = r.columns[k];
      const std::string text = k < n_axes ? detail::format_double(rec.coordinates.at(k)) : rec.cell(c);
      if (c == "status") {
        row[c] = text;
      } else if (text == "nan" || text == "inf" || text == "-inf") {
        row[c] = nullptr;
      } else {
        row[c] = std::stod(text);
      }
    }
    rows.push_back(std::move(row));
  }
  return {{"provenance", {{"tool", "magnomech"}, {"version", r.version}, {"spec_hash", r.spec_hash},
                          {"generated", generated}}},
          {"columns", r.columns},
          {"rows", std::move(rows)}};
}

/// Inverse of to_json (message and wall-clock fields not exported are lost).
inline SweepResult result_from_json(const nlohmann::json& j) {
  SweepResult r;
  r.version = j.at("provenance").at("version").get<std::string>();
  r.spec_hash = j.at("provenance").at("spec_hash").get<std::string>();
  r.columns = j.at("columns").get<std::vector<std::string>>();
  const std::size_t n_axes =
      static_cast<std::size_t>(std::find(r.columns.begin(), r.columns.end(), "status") -
                               r.columns.begin());
  auto number = [](const nlohmann::json& v) {
    return v.is_null() ? PointRecord::nan : v.get<double>();
  };
  auto flag = [](const nlohmann::json& v) -> std::optional<bool> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>() != 0.0;
  };
  static const char* en[] = {"en_ab", "en_am", "en_bm", "en_a_bm", "en_b_am", "en_m_ab"};
  for (const nlohmann::json& row : j.at("rows")) {
    PointRecord rec;
    for (std::size_t k = 0; k < n_axes; ++k) rec.coordinates.push_back(number(row.at(r.columns[k])));
    rec.status = row.at("status").get<std::string>();
    auto get = [&](const char* c) -> const nlohmann::json* {
      return row.contains(c) ? &row.at(c) : nullptr;
    };
    if (auto v = get("r_max")) rec.r_max = number(*v);
    if (auto v = get("t_max")) rec.t_max = number(*v);
    for (int k = 0; k < 6; ++k) {
      if (auto v = get(en[k])) rec.logneg[k] = number(*v);
    }
    if (auto v = get("routh_hurwitz")) rec.routh_hurwitz = flag(*v);
    if (auto v = get("floquet")) rec.floquet = flag(*v);
    if (auto v = get("max_re_eig")) rec.max_re_eig = number(*v);
    if (auto v = get("spectral_radius")) rec.spectral_radius = number(*v);
    if (auto v = get("physical")) rec.physical = flag(*v);
    if (auto v = get("monogamy_ok")) rec.monogamy_ok = flag(*v);
    if (auto v = get("max_abs_a")) rec.max_abs_a = number(*v);
    if (auto v = get("wall_time")) rec.wall_time = number(*v);
    r.records.push_back(std::move(rec));
  }
  return r;
}

enum class Format { csv, json };

inline void write_text(const std::string& text, const std::string& path) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline void emit(const SweepResult& r, Format format, const std::string& path) {
  const std::string generated = utc_timestamp();
  write_text(format == Format::csv ? to_csv(r, generated) : to_json(r, generated).dump(2) + "\n",
             path);
}

}  // namespace magnomech
