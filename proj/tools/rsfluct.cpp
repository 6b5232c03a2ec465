// rsfluct: path counts, symbolic traces, oracle verification, expansion
// reports, ensembles and the acceptance suite.
//
// Exit codes: 0 success, 1 check failure, 2 validation error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsfluct/rsfluct.hpp"

namespace fs = std::filesystem;
using namespace rsfluct;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_invalid = 2;

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Turns "--config FILE" into extra flags. Keys already on the command line
/// are skipped, so flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::set<std::string> given;
  for (const auto& a : out) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (given.count(key)) continue;
    if (key == "f") {
      // repeatable: f=poly:0,1;poly:0,0,0,1
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ';')) {
        out.push_back("--f");
        out.push_back(trim(item));
      }
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

std::vector<long> parse_grid(const std::string& text) {
  std::vector<long> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);  // accepts 1e5
      if (used != item.size() || v != std::floor(v) || v < 1) throw std::invalid_argument(item);
      grid.push_back(static_cast<long>(v));
    } catch (const std::exception&) {
      throw ValidationError("bad N grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("N grid is empty");
  return grid;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive, got " + format_double(alpha));
}

void emit(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  write_file((fs::path(out_dir) / name).string(), text);
}

/// Timestamp and host details, kept out of the reproducible payloads.
void write_run_info(const std::string& out_dir, const std::string& command) {
  if (out_dir.empty()) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json info{{"format", format_version}, {"command", command}, {"timestamp", stamp}};
  write_file((fs::path(out_dir) / "run_info.json").string(), info.dump(2) + "\n");
}

void prepare_out(const std::string& out_dir) {
  if (!out_dir.empty()) fs::create_directories(out_dir);
}

struct Common {
  double alpha = 0.3;
  std::string dist = "rademacher";
  std::string out;
  double tail_tol = 1e-9;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace statistics of the discrete Laplacian plus a decaying random potential", "rsfluct"};
  app.require_subcommand(1);

  // paths
  int paths_k = 0;
  std::string paths_beta;
  int paths_cap = default_enumeration_cap;
  std::string paths_out;
  auto* paths = app.add_subcommand("paths", "p^k(beta) table or a single count");
  paths->add_option("--k", paths_k, "path length")->required();
  paths->add_option("--beta", paths_beta, "multi-index, e.g. 2delta or delta+delta^1");
  paths->add_option("--cap", paths_cap, "enumeration cap");
  paths->add_option("--out", paths_out, "output directory (default stdout)");

  // trace-poly
  int tp_N = 0, tp_k = 0;
  std::string tp_out;
  auto* trace_poly = app.add_subcommand("trace-poly", "Tr H^k as a polynomial in V(1..N)");
  trace_poly->add_option("--N", tp_N, "matrix size")->required();
  trace_poly->add_option("--k", tp_k, "power")->required();
  trace_poly->add_option("--out", tp_out, "output directory (default stdout)");

  // verify
  std::string verify_level = "fast";
  std::string verify_inject;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "oracle identity suites");
  verify->add_option("--level", verify_level, "fast or full");
  verify->add_option("--inject", verify_inject, "fault k,N[,beta[,delta]] perturbing one coefficient");
  verify->add_option("--out", verify_out, "output directory (default stdout)");

  // expansion
  Common ex;
  std::optional<int> ex_k;
  std::string ex_f;
  long ex_N = 0;
  auto* expansion = app.add_subcommand("expansion", "constants of the expectation decomposition");
  expansion->add_option("--k", ex_k, "single power k");
  expansion->add_option("--f", ex_f, "series poly:<c0,c1,...> or exp:<a>");
  expansion->add_option("--N", ex_N, "matrix size")->required();
  expansion->add_option("--alpha", ex.alpha, "decay exponent");
  expansion->add_option("--dist", ex.dist, "rademacher | uniform:<halfwidth> | twopoint:a,b");
  expansion->add_option("--tail-tol", ex.tail_tol, "series tail tolerance");
  expansion->add_option("--out", ex.out, "output directory (default stdout, JSON only)");

  // simulate
  Common sim;
  std::vector<std::string> sim_f;
  std::string sim_grid = "1000";
  int sim_replicas = 100;
  std::uint64_t sim_seed = 1;
  int sim_workers = 0;
  std::string sim_case;
  auto* simulate = app.add_subcommand("simulate", "ensemble of Tr f(H_N) with CLT diagnostics");
  simulate->add_option("--f", sim_f, "series poly:<c0,c1,...> or exp:<a> (repeatable)")->required();
  simulate->add_option("--alpha", sim.alpha, "decay exponent");
  simulate->add_option("--n-grid", sim_grid, "comma-separated sizes, e.g. 1e4,1e5");
  simulate->add_option("--replicas", sim_replicas, "replica count M");
  simulate->add_option("--dist", sim.dist, "rademacher | uniform:<halfwidth> | twopoint:a,b");
  simulate->add_option("--seed", sim_seed, "base seed");
  simulate->add_option("--workers", sim_workers, "worker threads (0 = auto)");
  simulate->add_option("--tail-tol", sim.tail_tol, "series tail tolerance");
  simulate->add_option("--case", sim_case, "declare case A, B or C for every f");
  simulate->add_option("--out", sim.out, "output directory")->required();

  // accept
  std::vector<int> accept_only;
  int accept_workers = 0;
  std::string accept_out;
  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--only", accept_only, "criterion numbers");
  accept->add_option("--workers", accept_workers, "worker threads (0 = auto)");
  accept->add_option("--out", accept_out, "output directory for acceptance.json");

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 parses a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  }

  try {
    if (*paths) {
      prepare_out(paths_out);
      const Json config{{"command", "paths"}, {"k", paths_k}, {"cap", paths_cap}, {"beta", paths_beta}};
      if (!paths_beta.empty()) {
        const auto beta = parse_multi_index(paths_beta);
        emit(paths_out, "count.txt", std::to_string(count_p(paths_k, beta, paths_cap)) + "\n");
        return exit_ok;
      }
      std::ostringstream os;
      write_csv_preamble(os, config);
      os << "beta,weight,count\n";
      for (const auto& [beta, count] : profile_table(paths_k, paths_cap)) {
        os << beta.to_string() << "," << beta.weight() << "," << count << "\n";
      }
      emit(paths_out, "paths.csv", os.str());
      return exit_ok;
    }

    if (*trace_poly) {
      prepare_out(tp_out);
      const Json config{{"command", "trace-poly"}, {"N", tp_N}, {"k", tp_k}};
      std::ostringstream os;
      write_trace_poly_csv(os, trace_power_polynomial(tp_N, tp_k), config);
      emit(tp_out, "trace_poly.csv", os.str());
      return exit_ok;
    }

    if (*verify) {
      prepare_out(verify_out);
      const auto level = parse_verify_level(verify_level);
      std::optional<Fault> fault;
      if (!verify_inject.empty()) {
        std::vector<std::string> parts;
        std::stringstream ss(verify_inject);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        if (parts.size() < 2 || parts.size() > 4) throw ValidationError("--inject expects k,N[,beta[,delta]]");
        fault = Fault{std::stoi(parts[0]), std::stoi(parts[1]), std::nullopt, 1};
        if (parts.size() >= 3 && !parts[2].empty()) fault->beta = parse_multi_index(parts[2]);
        if (parts.size() == 4) fault->delta = std::stoll(parts[3]);
      }
      const auto report = run_verification(level, fault);
      Json config{{"command", "verify"}, {"level", verify_level}, {"inject", verify_inject}};
      Json out = envelope(config);
      out["report"] = to_json(report);
      emit(verify_out, "verify.json", out.dump(2) + "\n");
      for (const auto& c : report.checks) {
        if (!c.passed) std::cerr << "violation: " << c.detail << "\n";
      }
      std::cerr << report.checks.size() << " checks, " << report.failures() << " failures\n";
      write_run_info(verify_out, "verify");
      return report.ok() ? exit_ok : exit_check;
    }

    if (*expansion) {
      check_alpha(ex.alpha);
      if (ex_k.has_value() == !ex_f.empty()) throw ValidationError("expansion needs exactly one of --k or --f");
      prepare_out(ex.out);
      const auto dist = DistributionSpec::parse(ex.dist);
      const auto report = ex_k ? power_expansion(ex_N, *ex_k, ex.alpha, dist)
                               : analytic_expansion(parse_series(ex_f), ex_N, ex.alpha, dist, ex.tail_tol);
      const Json config{{"command", "expansion"}, {"k", optional_json(ex_k)}, {"f", ex_f}, {"N", ex_N},
                        {"alpha", ex.alpha}, {"dist", dist.to_string()}, {"tail_tol", ex.tail_tol}};
      Json out = envelope(config);
      out["report"] = to_json(report);
      emit(ex.out, "expansion.json", out.dump(2) + "\n");
      if (!ex.out.empty()) {
        std::ostringstream os;
        write_expansion_csv(os, report, config);
        emit(ex.out, "expansion.csv", os.str());
        write_run_info(ex.out, "expansion");
      }
      return exit_ok;
    }

    if (*simulate) {
      check_alpha(sim.alpha);
      EnsembleConfig cfg;
      cfg.alpha = sim.alpha;
      cfg.dist = DistributionSpec::parse(sim.dist);
      for (const auto& spec : sim_f) {
        auto f = parse_series(spec);
        if (!sim_case.empty()) f = f.with_case(parse_series_case(sim_case));
        check_radius(f, cfg.dist.bound());
        cfg.functions.push_back(std::move(f));
      }
      cfg.n_grid = parse_grid(sim_grid);
      cfg.replicas = sim_replicas;
      cfg.seed = sim_seed;
      cfg.workers = sim_workers;
      cfg.tail_tol = sim.tail_tol;
      prepare_out(sim.out);

      const auto result = run_ensemble(cfg);
      Json config = to_json(cfg);
      config["command"] = "simulate";
      config["case"] = to_string(result.regime);
      config["alpha_c"] = result.alpha_c;
      config["t"] = optional_json(result.t);

      std::ostringstream samples;
      write_samples_csv(samples, result, config);
      emit(sim.out, "samples.csv", samples.str());

      Json report = envelope(config);
      report["warnings"] = Json::array();
      if (!result.t) {
        report["warnings"].push_back("alpha > alpha_c: no scaling, CLT diagnostics skipped");
      } else if (static_cast<std::size_t>(cfg.replicas) < min_clt_replicas) {
        report["warnings"].push_back("fewer than " + std::to_string(min_clt_replicas) +
                                     " replicas: variance tests skipped");
      } else {
        std::map<std::string, double> sigma2;
        for (const auto& f : cfg.functions) {
          if (const auto s = sigma_theory(f, cfg.dist)) sigma2[f.id()] = *s;
        }
        report["clt"] = to_json(clt_check(result, sigma2));
        if (cfg.functions.size() >= 2) {
          std::vector<CorrelationMatrix> mats;
          for (std::size_t n = 0; n < cfg.n_grid.size(); ++n) mats.push_back(joint_correlation(result, n));
          std::ostringstream corr;
          write_correlation_csv(corr, mats, config);
          emit(sim.out, "correlation.csv", corr.str());
        }
      }
      if (cfg.n_grid.size() >= 2 && cfg.replicas >= 2) {
        Json conv = Json::array();
        for (std::size_t f = 0; f < cfg.functions.size(); ++f) conv.push_back(to_json(convergence_check(result, f)));
        report["convergence"] = conv;
      }
      for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      emit(sim.out, "clt_report.json", report.dump(2) + "\n");
      write_run_info(sim.out, "simulate");
      return exit_ok;
    }

    if (*accept) {
      prepare_out(accept_out);
      const std::set<int> only(accept_only.begin(), accept_only.end());
      const auto results = run_acceptance(only, accept_workers, [](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
      });
      if (!accept_out.empty()) {
        Json out = envelope({{"command", "accept"}, {"only", accept_only}});
        out["results"] = to_json(results);
        emit(accept_out, "acceptance.json", out.dump(2) + "\n");
        write_run_info(accept_out, "accept");
      }
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed;
      return ok ? exit_ok : exit_check;
    }
  } catch (const cap_exceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_check;
  }
  return exit_ok;
}
