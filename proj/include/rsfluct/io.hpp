#pragma once

// Serialization of reports and configs. Floats go out with 17 significant
// digits and no locale; every artifact carries the format version.

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsfluct/acceptance.hpp"
#include "rsfluct/expansion.hpp"
#include "rsfluct/montecarlo.hpp"
#include "rsfluct/symbolic.hpp"
#include "rsfluct/verify.hpp"

namespace rsfluct {

inline constexpr const char* format_version = "rsfluct/1";

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

/// Quotes a text field that holds a comma, quote or newline.
inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

/// Every artifact starts with the format version and the resolved config.
inline Json envelope(const Json& config) {
  Json out;
  out["format"] = format_version;
  out["config"] = config;
  return out;
}

/// CSV header lines: "# format: ..." and "# config: <one-line json>".
inline void write_csv_preamble(std::ostream& os, const Json& config) {
  os << "# format: " << format_version << "\n# config: " << config.dump() << "\n";
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline Json to_json(const ExpansionReport& r) {
  Json j;
  j["subject"] = r.subject;
  j["k"] = optional_json(r.power);
  j["N"] = r.N;
  j["alpha"] = r.alpha;
  j["dist"] = r.dist;
  j["A1"] = r.A1;
  j["A0"] = r.A0;
  Json c = Json::object(), s = Json::object(), lead = Json::object();
  for (const auto& [k, v] : r.C) c[std::to_string(k)] = v;
  for (const auto& [k, v] : r.S) s[std::to_string(k)] = v;
  for (const auto& [k, v] : r.leading) lead[std::to_string(k)] = v;
  j["C"] = c;
  j["S"] = s;
  j["B"] = r.B;
  j["D"] = r.D;
  j["m"] = r.m;
  j["leading"] = lead;
  j["remainder"] = r.remainder;
  j["reconstructed_mean"] = r.reconstructed_mean;
  j["truncation_degree"] = r.truncation_degree;
  j["tail_bound"] = r.tail_bound;
  return j;
}

/// j, C_j, S_j(N), C_j S_j(N); j = 0 is the free part A1 with S_0 = N.
inline void write_expansion_csv(std::ostream& os, const ExpansionReport& r, const Json& config) {
  write_csv_preamble(os, config);
  os << "j,C_j,S_j,contribution\n";
  const double n = static_cast<double>(r.N);
  os << "0," << format_double(r.A1) << "," << format_double(n) << "," << format_double(r.A1 * n) << "\n";
  for (const auto& [j, c] : r.C) {
    const double s = r.S.at(j);
    os << j << "," << format_double(c) << "," << format_double(s) << "," << format_double(c * s) << "\n";
  }
}

/// sites;... , exponents;... , coefficient. The constant term has empty lists.
inline void write_trace_poly_csv(std::ostream& os, const TracePolynomial& poly, const Json& config) {
  write_csv_preamble(os, config);
  os << "sites,exponents,coefficient\n";
  os << "constant,," << poly.constant << "\n";
  for (const auto& [monomial, coeff] : poly.terms) {
    std::string sites, exps;
    for (const auto& [site, e] : monomial.entries()) {
      if (!sites.empty()) {
        sites += ';';
        exps += ';';
      }
      sites += std::to_string(site);
      exps += std::to_string(e);
    }
    os << sites << "," << exps << "," << coeff << "\n";
  }
}

inline Json to_json(const EnsembleConfig& c) {
  Json j;
  j["alpha"] = c.alpha;
  j["dist"] = c.dist.to_string();
  Json fs = Json::array();
  for (const auto& f : c.functions) fs.push_back({{"id", f.id()}, {"case", to_string(f.regime())}});
  j["functions"] = fs;
  j["n_grid"] = c.n_grid;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["tail_tol"] = c.tail_tol;
  j["coupled"] = c.coupled;
  return j;
}

inline void write_samples_csv(std::ostream& os, const EnsembleResult& r, const Json& config) {
  write_csv_preamble(os, config);
  os << "replica,f_id,N,raw_trace,centered,scaled\n";
  for (const auto& s : r.series) {
    for (std::size_t i = 0; i < s.raw.size(); ++i) {
      os << i << "," << csv_field(s.f_id) << "," << s.N << "," << format_double(s.raw[i]) << ","
         << format_double(s.centered[i]) << "," << (s.scaled.empty() ? std::string() : format_double(s.scaled[i]))
         << "\n";
    }
  }
}

inline Json to_json(const CltReport& report) {
  Json out = Json::array();
  for (const auto& e : report.entries) {
    Json j;
    j["f_id"] = e.f_id;
    j["N"] = e.N;
    j["variance"] = e.variance;
    j["sigma2"] = optional_json(e.sigma2);
    j["ratio"] = optional_json(e.ratio);
    j["skewness"] = e.skewness;
    j["excess_kurtosis"] = e.excess_kurtosis;
    j["ks"] = optional_json(e.ks);
    j["bootstrap99"] = {{"variance", {e.intervals.variance.lo, e.intervals.variance.hi}},
                        {"skewness", {e.intervals.skewness.lo, e.intervals.skewness.hi}},
                        {"excess_kurtosis", {e.intervals.excess_kurtosis.lo, e.intervals.excess_kurtosis.hi}}};
    j["degenerate"] = e.degenerate;
    out.push_back(j);
  }
  return out;
}

inline void write_correlation_csv(std::ostream& os, const std::vector<CorrelationMatrix>& mats, const Json& config) {
  write_csv_preamble(os, config);
  os << "N,f_i,f_j,correlation\n";
  for (const auto& m : mats) {
    for (std::size_t a = 0; a < m.ids.size(); ++a) {
      for (std::size_t b = 0; b < m.ids.size(); ++b) {
        const auto& v = m.values[a][b];
        os << m.N << "," << csv_field(m.ids[a]) << "," << csv_field(m.ids[b]) << "," << (v ? format_double(*v) : std::string("undefined"))
           << "\n";
      }
    }
  }
}

inline Json to_json(const ConvergenceReport& r) {
  Json j;
  j["f_id"] = r.f_id;
  j["converges"] = r.converges;
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"n_small", s.n_small},
                     {"n_large", s.n_large},
                     {"variance", s.variance},
                     {"q50", s.q50},
                     {"q90", s.q90},
                     {"q99", s.q99},
                     {"max_abs", s.max_abs},
                     {"variance_bound", optional_json(s.variance_bound)},
                     {"absolute_bound", optional_json(s.absolute_bound)}});
  }
  j["steps"] = steps;
  return j;
}

inline Json to_json(const VerifyReport& r) {
  Json j;
  j["level"] = to_string(r.level);
  j["checks_run"] = r.checks.size();
  j["failures"] = r.failures();
  Json failed = Json::array();
  std::size_t identity = 0, decomposition = 0;
  for (const auto& c : r.checks) {
    (c.suite == "identity" ? identity : decomposition) += 1;
    if (!c.passed) {
      failed.push_back({{"suite", c.suite}, {"k", c.k}, {"N", c.N}, {"alpha", optional_json(c.alpha)},
                        {"dist", c.dist}, {"detail", c.detail}});
    }
  }
  j["identity_checks"] = identity;
  j["decomposition_checks"] = decomposition;
  j["failed"] = failed;
  return j;
}

inline Json to_json(const std::vector<CriterionResult>& results) {
  Json out = Json::array();
  for (const auto& r : results) {
    out.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  return out;
}

}  // namespace rsfluct
