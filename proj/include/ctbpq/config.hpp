#pragma once

// Flat "key = value" run configuration. Lines starting with '#' (or the rest
// of a line after '#') are comments. Lists are comma or space separated.
//
//   T, N          uniform breakpoints T_n = n T / N (when breakpoints absent)
//   breakpoints   T_0 = 0 < T_1 < ... < T_N
//   levels        one nonnegative weight per interval, rescaled to a density
//   alpha, K, c, mu, epsilon, t_max, seed, reps
//   t_grid        explicit list, or start:stop:step
//   preset        paper-section5 (later keys override it)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"

namespace ctbpq {

struct GridRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
};

struct RunConfig {
  ModelSpec model;
  std::vector<double> t_grid;
  std::optional<GridRange> t_range;
  std::uint64_t seed = 1;
  std::uint64_t reps = 10000;

  // Grid times must lie in (0, t_max] when t_max is set, else (0, T].
  void validate() const {
    model.validate();
    const double limit = model.t_max.value_or(model.horizon());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (!(t_grid[i] > 0.0) || t_grid[i] > limit) {
        throw ConfigError("t_grid value " + std::to_string(t_grid[i]) + " outside (0, " + std::to_string(limit) + "]");
      }
      if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ConfigError("t_grid must be strictly increasing");
    }
    if (reps < 1) throw ConfigError("reps must be at least 1");
  }
};

inline std::vector<double> expand_grid(const GridRange& r) {
  if (!(r.step > 0.0) || !std::isfinite(r.step)) throw ConfigError("t_grid step must be positive");
  if (!(r.stop >= r.start)) throw ConfigError("t_grid stop precedes start");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((r.stop - r.start) / r.step * (1.0 + 1e-12))) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(r.start + static_cast<double>(i) * r.step);
  return out;
}

inline RunConfig benchmark_config(std::size_t K = 1000) {
  RunConfig cfg;
  cfg.model = benchmark_spec(K);
  cfg.t_range = GridRange{5.0, 300.0, 5.0};
  cfg.t_grid = expand_grid(*cfg.t_range);
  return cfg;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("key '" + key + "': not a nonnegative integer: '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': integer out of range");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::string s = v;
  for (char& ch : s) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(key, tok));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_list(std::span<const double> xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(xs[i]);
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> order;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
    kv[key] = value;
    order.push_back(key);
  }

  static const std::vector<std::string> known = {"preset", "T",       "N",      "breakpoints", "levels", "alpha", "K",
                                                 "c",      "mu",      "epsilon", "t_grid",     "t_max",  "seed",  "reps"};
  for (const auto& key : order) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown key '" + key + "'");
  }

  RunConfig cfg;
  if (kv.count("preset")) {
    if (kv["preset"] != "paper-section5") throw ConfigError("unknown preset '" + kv["preset"] + "'");
    cfg = benchmark_config();
  }
  ModelSpec& m = cfg.model;

  std::optional<std::vector<double>> breakpoints;
  if (kv.count("breakpoints")) {
    breakpoints = detail::parse_list("breakpoints", kv["breakpoints"]);
    if (kv.count("T") && detail::parse_double("T", kv["T"]) != breakpoints->back()) {
      throw ConfigError("T disagrees with the last breakpoint");
    }
    if (kv.count("N") && detail::parse_count("N", kv["N"]) + 1 != breakpoints->size()) {
      throw ConfigError("N disagrees with the number of breakpoints");
    }
  } else if (kv.count("T") || kv.count("N")) {
    if (!kv.count("T") || !kv.count("N")) throw ConfigError("T and N must be given together");
    const double T = detail::parse_double("T", kv["T"]);
    const std::uint64_t N = detail::parse_count("N", kv["N"]);
    if (!(T > 0.0) || N < 1) throw ConfigError("need T > 0 and N >= 1");
    breakpoints.emplace(N + 1);
    for (std::uint64_t n = 0; n <= N; ++n) (*breakpoints)[n] = T * static_cast<double>(n) / static_cast<double>(N);
  }
  if (kv.count("levels")) {
    std::vector<double> levels = detail::parse_list("levels", kv["levels"]);
    std::vector<double> bp = breakpoints ? *breakpoints : std::vector<double>(m.pdf.breakpoints().begin(), m.pdf.breakpoints().end());
    if (levels.size() + 1 != bp.size()) throw ConfigError("levels must have one entry per interval");
    m.pdf = PiecewisePdf::from_weights(std::move(bp), std::move(levels));
  } else if (breakpoints) {
    if (breakpoints->size() < 2) throw ConfigError("need at least two breakpoints");
    std::vector<double> ones(breakpoints->size() - 1, 1.0);
    m.pdf = PiecewisePdf::from_weights(std::move(*breakpoints), std::move(ones));
  }

  if (kv.count("alpha")) m.alpha = detail::parse_double("alpha", kv["alpha"]);
  if (kv.count("K")) m.K = detail::parse_count("K", kv["K"]);
  if (kv.count("c")) m.c = detail::parse_count("c", kv["c"]);
  if (kv.count("mu")) m.mu = detail::parse_double("mu", kv["mu"]);
  if (kv.count("epsilon")) m.epsilon = detail::parse_double("epsilon", kv["epsilon"]);
  if (kv.count("t_max")) m.t_max = detail::parse_double("t_max", kv["t_max"]);
  if (kv.count("seed")) cfg.seed = detail::parse_count("seed", kv["seed"]);
  if (kv.count("reps")) cfg.reps = detail::parse_count("reps", kv["reps"]);
  if (kv.count("t_grid")) {
    const std::string& v = kv["t_grid"];
    if (v.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::istringstream ps(v);
      std::string part;
      while (std::getline(ps, part, ':')) parts.push_back(detail::trim(part));
      if (parts.size() != 3) throw ConfigError("t_grid range must be start:stop:step");
      cfg.t_range = GridRange{detail::parse_double("t_grid", parts[0]), detail::parse_double("t_grid", parts[1]),
                              detail::parse_double("t_grid", parts[2])};
      cfg.t_grid = expand_grid(*cfg.t_range);
    } else {
      cfg.t_range.reset();
      cfg.t_grid = detail::parse_list("t_grid", v);
    }
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const RunConfig& cfg) {
  const ModelSpec& m = cfg.model;
  std::ostringstream out;
  out << "breakpoints = " << detail::format_list(m.pdf.breakpoints()) << "\n";
  out << "levels = " << detail::format_list(m.pdf.levels()) << "\n";
  out << "alpha = " << detail::format_double(m.alpha) << "\n";
  out << "K = " << m.K << "\n";
  out << "c = " << m.c << "\n";
  out << "mu = " << detail::format_double(m.mu) << "\n";
  out << "epsilon = " << detail::format_double(m.epsilon) << "\n";
  if (m.t_max) out << "t_max = " << detail::format_double(*m.t_max) << "\n";
  if (cfg.t_range) {
    out << "t_grid = " << detail::format_double(cfg.t_range->start) << ":" << detail::format_double(cfg.t_range->stop) << ":"
        << detail::format_double(cfg.t_range->step) << "\n";
  } else if (!cfg.t_grid.empty()) {
    out << "t_grid = " << detail::format_list(cfg.t_grid) << "\n";
  }
  out << "seed = " << cfg.seed << "\n";
  out << "reps = " << cfg.reps << "\n";
  return out.str();
}

}  // namespace ctbpq
