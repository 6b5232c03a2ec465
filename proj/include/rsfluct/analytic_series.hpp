#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsfluct/combinatorics.hpp"
#include "rsfluct/numeric.hpp"
#include "rsfluct/tridiagonal.hpp"

namespace rsfluct {

/// Which fluctuation regime a test function belongs to. `polynomial` marks a
/// plain polynomial with no regime declared; the regime is then inferred.
enum class SeriesCase { A, B, C, polynomial };

inline const char* to_string(SeriesCase c) noexcept {
  switch (c) {
    case SeriesCase::A: return "A";
    case SeriesCase::B: return "B";
    case SeriesCase::C: return "C";
    case SeriesCase::polynomial: return "polynomial";
  }
  return "?";
}

/// Critical decay exponent of a regime: 1/2, 1/4, 1/6.
inline double critical_alpha(SeriesCase c) {
  switch (c) {
    case SeriesCase::A: return 0.5;
    case SeriesCase::B: return 0.25;
    case SeriesCase::C: return 1.0 / 6.0;
    case SeriesCase::polynomial: break;
  }
  throw std::invalid_argument("critical_alpha: regime must be A, B or C");
}

/// Beyond this order, terms of an infinite series are taken as negligible.
inline constexpr int series_scan_limit = 400;

/// f(x) = sum_j c_j x^j with radius of convergence r(f).
class AnalyticSeries {
 public:
  static AnalyticSeries polynomial(std::vector<double> coefficients, std::string id = {}) {
    while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
    AnalyticSeries f;
    f.id_ = id.empty() ? "poly" : std::move(id);
    f.degree_ = coefficients.empty() ? 0 : static_cast<int>(coefficients.size()) - 1;
    f.radius_ = std::numeric_limits<double>::infinity();
    auto shared = std::make_shared<const std::vector<double>>(std::move(coefficients));
    f.coefficient_ = [shared](int j) {
      return j < static_cast<int>(shared->size()) ? (*shared)[static_cast<std::size_t>(j)] : 0.0;
    };
    f.tag_ = f.classify();
    return f;
  }

  /// exp(scale * x).
  static AnalyticSeries exponential(double scale, std::string id = {}) {
    AnalyticSeries f;
    f.id_ = id.empty() ? "exp" : std::move(id);
    f.radius_ = std::numeric_limits<double>::infinity();
    f.coefficient_ = [scale](int j) { return std::pow(scale, j) / std::tgamma(j + 1.0); };
    f.tag_ = f.classify();
    return f;
  }

  static AnalyticSeries from_generator(std::function<double(int)> coefficient, double radius,
                                       std::string id) {
    if (!(radius > 0.0)) throw std::invalid_argument("series radius must be positive");
    AnalyticSeries f;
    f.id_ = std::move(id);
    f.radius_ = radius;
    f.coefficient_ = std::move(coefficient);
    f.tag_ = f.classify();
    return f;
  }

  double coefficient(int j) const { return j < 0 ? 0.0 : coefficient_(j); }
  std::optional<int> degree() const noexcept { return degree_; }
  bool is_polynomial() const noexcept { return degree_.has_value(); }
  double radius() const noexcept { return radius_; }
  const std::string& id() const noexcept { return id_; }
  SeriesCase case_tag() const noexcept { return tag_; }

  /// Last order considered when summing the series.
  int scan_limit() const noexcept { return degree_ ? *degree_ : series_scan_limit; }

  AnalyticSeries renamed(std::string id) const {
    AnalyticSeries copy = *this;
    copy.id_ = std::move(id);
    return copy;
  }

  /// Declares the regime, checking the coefficient pattern it requires.
  AnalyticSeries with_case(SeriesCase tag, double tol = 1e-9) const {
    AnalyticSeries copy = *this;
    const int last = scan_limit();
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("series '" + id_ + "' is not case " + to_string(tag) + ": " + why);
    };
    switch (tag) {
      case SeriesCase::polynomial:
        if (!degree_) fail("not a polynomial");
        break;
      case SeriesCase::B:
        for (int j = 1; j <= last; j += 2) {
          if (coefficient(j) != 0.0) fail("odd coefficient c_" + std::to_string(j) + " is nonzero");
        }
        break;
      case SeriesCase::C: {
        for (int j = 0; j <= last; j += 2) {
          if (coefficient(j) != 0.0) fail("even coefficient c_" + std::to_string(j) + " is nonzero");
        }
        const double target = case_c_linear_coefficient();
        const double c1 = coefficient(1);
        if (std::fabs(c1 - target) > tol * std::max(1.0, std::fabs(target))) {
          fail("x-coefficient " + std::to_string(c1) + " differs from -sum c_j p^j(delta) = " +
               std::to_string(target));
        }
        break;
      }
      case SeriesCase::A:
        break;
    }
    copy.tag_ = tag;
    return copy;
  }

  /// -sum_{j>=3} c_j p^j(delta), the x-coefficient of the odd normal form.
  double case_c_linear_coefficient() const {
    NeumaierSum sum;
    for (int j = 3; j <= scan_limit(); j += 2) {
      const double c = coefficient(j);
      if (c != 0.0) sum.add(-c * p_delta_closed(j).convert_to<double>());
    }
    return sum.value();
  }

  /// B for even-only series, C for odd-only series in normal form, else A.
  SeriesCase classify(double tol = 1e-9) const {
    const int last = scan_limit();
    bool odd_zero = true;
    bool even_zero = true;
    for (int j = 0; j <= last; ++j) {
      const double c = coefficient(j);
      if (c == 0.0) continue;
      if (j % 2 == 1) odd_zero = false;
      else even_zero = false;
    }
    if (odd_zero) return SeriesCase::B;
    if (even_zero) {
      const double target = case_c_linear_coefficient();
      const bool has_higher = [&] {
        for (int j = 3; j <= last; j += 2) {
          if (coefficient(j) != 0.0) return true;
        }
        return false;
      }();
      if (has_higher && std::fabs(coefficient(1) - target) <= tol * std::max(1.0, std::fabs(target))) {
        return SeriesCase::C;
      }
    }
    return SeriesCase::A;
  }

  /// The regime used for scaling: the declared tag, or the inferred one.
  SeriesCase regime() const { return tag_ == SeriesCase::polynomial ? classify() : tag_; }

 private:
  AnalyticSeries() = default;

  std::string id_;
  std::function<double(int)> coefficient_;
  std::optional<int> degree_;
  double radius_ = 0.0;
  SeriesCase tag_ = SeriesCase::A;
};

inline SeriesCase parse_series_case(std::string_view text) {
  if (text == "A") return SeriesCase::A;
  if (text == "B") return SeriesCase::B;
  if (text == "C") return SeriesCase::C;
  throw std::invalid_argument("case must be A, B or C, got '" + std::string(text) + "'");
}

/// "poly:c0,c1,..." or "exp:a". The spec text becomes the series id.
inline AnalyticSeries parse_series(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("function spec '" + std::string(spec) + "' must be poly:<c0,c1,...> or exp:<a>");
  }
  const auto kind = spec.substr(0, colon);
  const std::string body(spec.substr(colon + 1));
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
      throw std::invalid_argument("bad number '" + text + "' in function spec '" + std::string(spec) + "'");
    }
    return v;
  };
  if (kind == "poly") {
    std::vector<double> coeffs;
    std::size_t start = 0;
    while (start <= body.size()) {
      const auto comma = body.find(',', start);
      const auto end = comma == std::string::npos ? body.size() : comma;
      coeffs.push_back(number(body.substr(start, end - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return AnalyticSeries::polynomial(std::move(coeffs), std::string(spec));
  }
  if (kind == "exp") return AnalyticSeries::exponential(number(body), std::string(spec));
  throw std::invalid_argument("unknown function kind '" + std::string(kind) + "' (use poly or exp)");
}

struct Truncation {
  int degree = 0;
  double tail_bound = 0.0;
};

/// Smallest K with scale * sum_{j>K} |c_j| rho^j <= tol. For the trace of
/// f(H) use rho = 2 + C_X and scale = N.
inline Truncation choose_truncation(const AnalyticSeries& f, double rho, double scale, double tol,
                                    int max_degree) {
  const int last = f.scan_limit();
  std::vector<double> weighted(static_cast<std::size_t>(last) + 1);
  for (int j = 0; j <= last; ++j) {
    weighted[static_cast<std::size_t>(j)] = std::fabs(f.coefficient(j)) * std::pow(rho, j);
  }
  if (!f.is_polynomial() && scale * weighted.back() > 1e-3 * tol) {
    throw std::invalid_argument("series '" + f.id() + "': terms |c_j| rho^j do not decay by order " +
                                std::to_string(last) + "; tail not summable at tolerance");
  }
  // tails[K] = sum_{j > K} weighted[j]
  std::vector<double> tails(static_cast<std::size_t>(last) + 1, 0.0);
  for (int j = last - 1; j >= 0; --j) {
    tails[static_cast<std::size_t>(j)] = tails[static_cast<std::size_t>(j) + 1] + weighted[static_cast<std::size_t>(j) + 1];
  }
  for (int K = 0; K <= std::min(last, max_degree); ++K) {
    if (scale * tails[static_cast<std::size_t>(K)] <= tol) return {K, scale * tails[static_cast<std::size_t>(K)]};
  }
  throw std::invalid_argument("series '" + f.id() + "': no truncation degree <= " +
                              std::to_string(max_degree) + " meets tail tolerance " + std::to_string(tol));
}

inline void check_radius(const AnalyticSeries& f, double bound) {
  if (!(f.radius() > bound + 2.0)) {
    throw std::invalid_argument("series '" + f.id() + "': radius " + std::to_string(f.radius()) +
                                " must exceed C_X + 2 = " + std::to_string(bound + 2.0));
  }
}

struct TraceValue {
  double value = 0.0;
  int degree = 0;
  double tail_bound = 0.0;
};

/// sum_{j<=K} c_j moments[j].
inline double apply_series(const AnalyticSeries& f, std::span<const double> moments, int degree) {
  NeumaierSum sum;
  for (int j = 0; j <= degree; ++j) {
    const double c = f.coefficient(j);
    if (c != 0.0) sum.add(c * moments[static_cast<std::size_t>(j)]);
  }
  return sum.value();
}

inline constexpr int default_max_series_degree = 64;

/// Tr f(H) for the sample, truncated where the tail bound meets tail_tol.
inline TraceValue trace_f(const PotentialSample& sample, const AnalyticSeries& f, double tail_tol = 1e-9,
                          int max_degree = default_max_series_degree) {
  const double bound = sample.dist.bound();
  check_radius(f, bound);
  const auto trunc = choose_truncation(f, 2.0 + bound, static_cast<double>(sample.N), tail_tol, max_degree);
  const auto moments = trace_moments(sample, trunc.degree);
  return {apply_series(f, moments, trunc.degree), trunc.degree, trunc.tail_bound};
}

}  // namespace rsfluct
