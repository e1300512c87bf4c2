#pragma once

// Flat key-value parameter documents.
//
//   # comment
//   delta_a_over_omega_b = 0.73     # scaled by the mechanical frequency
//   kappa_a   = 1.2566e7            # plain names are SI, rad/s
//   theta_c   = 0.5pi               # a trailing "pi" multiplies by pi
//   power     = 2e-6                # W, converted to epsilon_d
//
// Rates and detunings accept either the plain SI name or the scaled
// `<name>_over_omega_b` form. `omega_b`, `omega_d`, `omega_a`, `omega_s`
// and `omega_c` are absolute SI frequencies; `omega_b` fixes the unit.
// Angles are in rad, `temperature` in K. `delta_theta` sets
// theta_m = theta_c - delta_theta. Keys containing a dot belong to an
// enclosing document (see sweep.hpp) and are handed to the caller.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "magnomech/errors.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

}  // namespace detail

/// Splits a document into key/value entries. Duplicate keys are errors.
inline std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(detail::at_line(line_no) + "expected 'key = value', got '" +
                       std::string(line) + "'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(detail::at_line(line_no) + "empty key");
    if (value.empty()) throw ParseError(detail::at_line(line_no) + "empty value for '" + key + "'");
    for (const KeyValue& kv : out) {
      if (kv.key == key) {
        throw ParseError(detail::at_line(line_no) + "duplicate key '" + key + "' (first at line " +
                         std::to_string(kv.line) + ")");
      }
    }
    out.push_back({key, value, line_no});
  }
  return out;
}

/// Parses a real number, optionally suffixed by `pi` ("pi", "2pi", "-0.5pi").
inline double parse_number(const KeyValue& kv) {
  std::string_view s = kv.value;
  double scale = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    scale = std::numbers::pi;
    s = detail::trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = detail::trim(s.substr(0, s.size() - 1));
    if (s.empty() || s == "+") return scale;
    if (s == "-") return -scale;
  }
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(detail::at_line(kv.line) + "'" + kv.key + "' expects a number, got '" +
                     kv.value + "'");
  }
  return v * scale;
}

inline long long parse_integer(const KeyValue& kv) {
  long long v = 0;
  const std::string_view s = kv.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(detail::at_line(kv.line) + "'" + kv.key + "' expects an integer, got '" +
                     kv.value + "'");
  }
  return v;
}

/// Rate-like members, stored in units of omega_b.
inline double* rate_field(SystemParams& p, std::string_view name) {
  if (name == "delta_a") return &p.delta_a;
  if (name == "delta_s") return &p.delta_s;
  if (name == "omega_c_prime") return &p.omega_c_prime;
  if (name == "omega_m") return &p.omega_m;
  if (name == "g") return &p.g;
  if (name == "lambda") return &p.lambda;
  if (name == "kappa_a") return &p.kappa_a;
  if (name == "kappa_m") return &p.kappa_m;
  if (name == "gamma_b") return &p.gamma_b;
  if (name == "xi_c") return &p.xi_c;
  if (name == "xi_m") return &p.xi_m;
  if (name == "epsilon_d") return &p.epsilon_d;
  return nullptr;
}

inline constexpr std::string_view kScaledSuffix = "_over_omega_b";

namespace detail {

inline std::optional<std::string_view> strip_scaled(std::string_view name) {
  if (name.size() > kScaledSuffix.size() &&
      name.substr(name.size() - kScaledSuffix.size()) == kScaledSuffix) {
    return name.substr(0, name.size() - kScaledSuffix.size());
  }
  return std::nullopt;
}

}  // namespace detail

/// Sets one named quantity, interpreting plain rate names as SI (rad/s)
/// against p.omega_b_si. Returns false for names it does not know.
inline bool set_quantity(SystemParams& p, std::string_view name, double value) {
  if (const auto base = detail::strip_scaled(name)) {
    double* field = rate_field(p, *base);
    if (!field) return false;
    *field = value;
    return true;
  }
  if (double* field = rate_field(p, name)) {
    *field = value / p.omega_b_si;
    return true;
  }
  if (name == "theta_c") p.theta_c = value;
  else if (name == "theta_m") p.theta_m = value;
  else if (name == "delta_theta") p.theta_m = p.theta_c - value;
  else if (name == "temperature") p.temperature = value;
  else return false;
  return true;
}

/// Names accepted as sweep axes.
inline bool is_sweepable(std::string_view name) {
  SystemParams probe;
  return set_quantity(probe, name, 1.0);
}

/// Sets one swept coordinate; same naming rules as the document keys.
inline void set_coordinate(SystemParams& p, std::string_view name, double value) {
  if (!set_quantity(p, name, value)) {
    throw ParseError("unknown parameter '" + std::string(name) + "'");
  }
}

/// Builds SystemParams from parsed entries. Entries whose key contains a
/// dot are passed to `extra` (ParseError when `extra` is empty).
inline SystemParams params_from_entries(
    const std::vector<KeyValue>& entries,
    const std::function<void(const KeyValue&)>& extra = nullptr) {
  SystemParams p;
  // The unit and the phase reference first: other keys depend on them.
  for (const KeyValue& kv : entries) {
    if (kv.key == "omega_b") p.omega_b_si = parse_number(kv);
    if (kv.key == "theta_c") p.theta_c = parse_number(kv);
  }
  std::optional<double> power;
  std::optional<double> delta_theta;
  const KeyValue* epsilon_key = nullptr;
  const KeyValue* theta_m_key = nullptr;
  for (const KeyValue& kv : entries) {
    const std::string_view key = kv.key;
    if (key.find('.') != std::string_view::npos) {
      if (!extra) throw ParseError(detail::at_line(kv.line) + "unknown key '" + kv.key + "'");
      extra(kv);
      continue;
    }
    if (key == "omega_b" || key == "theta_c") continue;
    const double v = parse_number(kv);
    if (key == "omega_d") p.omega_d_si = v;
    else if (key == "omega_a") p.omega_a_si = v;
    else if (key == "omega_s") p.omega_s_si = v;
    else if (key == "omega_c") p.omega_c_si = v;
    else if (key == "power") power = v;
    else if (key == "delta_theta") delta_theta = v;
    else if (!set_quantity(p, key, v)) {
      throw ParseError(detail::at_line(kv.line) + "unknown key '" + kv.key + "'");
    }
    if (key == "epsilon_d" || key == "epsilon_d_over_omega_b") epsilon_key = &kv;
    if (key == "theta_m") theta_m_key = &kv;
    if (rate_field(p, key) && detail::strip_scaled(key) == std::nullopt) {
      // A plain and a scaled spelling of the same quantity conflict.
      for (const KeyValue& other : entries) {
        if (other.key == std::string(key) + std::string(kScaledSuffix)) {
          throw ParseError(detail::at_line(other.line) + "'" + other.key + "' conflicts with '" +
                           kv.key + "' at line " + std::to_string(kv.line));
        }
      }
    }
  }
  if (power) {
    if (epsilon_key) throw ParseError("'power' and 'epsilon_d' are mutually exclusive");
    try {
      p.epsilon_d = drive_amplitude_from_power(*power, p.kappa_a * p.omega_b_si, p.omega_d_si) /
                    p.omega_b_si;
    } catch (const DomainError& e) {
      throw ParseError(std::string("power: ") + e.what());
    }
  }
  if (delta_theta) {
    if (theta_m_key) throw ParseError("'delta_theta' and 'theta_m' are mutually exclusive");
    p.theta_m = p.theta_c - *delta_theta;
  }
  return p;
}

inline SystemParams parse_params(std::string_view text) {
  SystemParams p = params_from_entries(parse_key_values(text));
  try {
    validate(p);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return p;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return buf.str();
}

inline SystemParams load_params(const std::string& path) {
  try {
    return parse_params(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace magnomech
