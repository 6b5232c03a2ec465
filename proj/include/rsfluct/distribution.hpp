#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsfluct {

/// Law of the i.i.d. site variables X_n: centered, bounded by C_X, with
/// eta^2 = E[X^2] > 0.
class DistributionSpec {
 public:
  enum class Kind { rademacher, uniform_symmetric, two_point, custom_moments };

  static DistributionSpec rademacher() {
    DistributionSpec d;
    d.kind_ = Kind::rademacher;
    d.bound_ = 1.0;
    return d;
  }

  /// Uniform on [-a, a]; a = sqrt(3) gives eta^2 = 1 and E[X^4] = 9/5.
  static DistributionSpec uniform_symmetric(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw std::invalid_argument("uniform half-width must be positive and finite");
    }
    DistributionSpec d;
    d.kind_ = Kind::uniform_symmetric;
    d.bound_ = half_width;
    d.values_ = {half_width};
    return d;
  }

  /// Two atoms a < 0 < b with the unique weights making the mean zero.
  static DistributionSpec two_point(double a, double b) {
    if (!(a < 0.0 && b > 0.0)) throw std::invalid_argument("two-point law needs a < 0 < b");
    DistributionSpec d;
    d.kind_ = Kind::two_point;
    d.bound_ = std::max(-a, b);
    d.values_ = {a, b};
    d.probs_ = {b / (b - a), -a / (b - a)};
    return d;
  }

  /// Moments E[X^m] for m = 0..moments.size()-1. Cannot be sampled.
  static DistributionSpec custom_moments(std::vector<double> moments, double bound) {
    if (moments.size() < 3) throw std::invalid_argument("custom law needs moments up to order 2");
    if (moments[0] != 1.0) throw std::invalid_argument("custom law must have E[X^0] = 1");
    if (moments[1] != 0.0) throw std::invalid_argument("custom law must be centered");
    if (!(moments[2] > 0.0)) throw std::invalid_argument("custom law must have eta^2 > 0");
    if (!(bound > 0.0)) throw std::invalid_argument("custom law needs a positive bound C_X");
    DistributionSpec d;
    d.kind_ = Kind::custom_moments;
    d.bound_ = bound;
    d.values_ = std::move(moments);
    return d;
  }

  /// "rademacher", "uniform:<halfwidth>", "uniform" (= uniform:sqrt(3)),
  /// "twopoint:<a>,<b>".
  static DistributionSpec parse(std::string_view text) {
    auto number = [&](std::string_view s) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument("bad number '" + std::string(s) + "' in distribution spec");
      }
      return v;
    };
    if (text == "rademacher") return rademacher();
    if (text == "uniform") return uniform_symmetric(std::sqrt(3.0));
    if (text.starts_with("uniform:")) {
      auto arg = text.substr(8);
      if (arg == "sqrt3") return uniform_symmetric(std::sqrt(3.0));
      return uniform_symmetric(number(arg));
    }
    if (text.starts_with("twopoint:")) {
      auto arg = text.substr(9);
      const auto comma = arg.find(',');
      if (comma == std::string_view::npos) throw std::invalid_argument("twopoint needs 'a,b'");
      return two_point(number(arg.substr(0, comma)), number(arg.substr(comma + 1)));
    }
    throw std::invalid_argument("unknown distribution '" + std::string(text) +
                                "' (expected rademacher or uniform:<halfwidth>)");
  }

  Kind kind() const noexcept { return kind_; }
  double bound() const noexcept { return bound_; }
  double eta2() const { return moment(2); }
  double fourth_moment() const { return moment(4); }

  bool has_moment(int m) const noexcept {
    return kind_ != Kind::custom_moments || m < static_cast<int>(values_.size());
  }

  /// E[X^m].
  double moment(int m) const {
    if (m < 0) throw std::invalid_argument("negative moment order");
    if (m == 0) return 1.0;
    switch (kind_) {
      case Kind::rademacher:
        return m % 2 == 0 ? 1.0 : 0.0;
      case Kind::uniform_symmetric:
        return m % 2 == 0 ? std::pow(bound_, m) / (m + 1) : 0.0;
      case Kind::two_point:
        return probs_[0] * std::pow(values_[0], m) + probs_[1] * std::pow(values_[1], m);
      case Kind::custom_moments:
        if (m >= static_cast<int>(values_.size())) {
          throw std::invalid_argument("distribution lacks moment of order " + std::to_string(m));
        }
        return values_[static_cast<std::size_t>(m)];
    }
    return 0.0;
  }

  /// E[|X|^m].
  double abs_moment(int m) const {
    if (m % 2 == 0) return moment(m);
    switch (kind_) {
      case Kind::rademacher: return 1.0;
      case Kind::uniform_symmetric: return std::pow(bound_, m) / (m + 1);
      case Kind::two_point:
        return probs_[0] * std::pow(-values_[0], m) + probs_[1] * std::pow(values_[1], m);
      case Kind::custom_moments:
        // Only the bound is known for odd absolute moments.
        return std::pow(bound_, m);
    }
    return 0.0;
  }

  /// Maps 64 uniformly random bits to one draw of X.
  double draw(std::uint64_t bits) const {
    switch (kind_) {
      case Kind::rademacher:
        return (bits >> 63) != 0 ? 1.0 : -1.0;
      case Kind::uniform_symmetric: {
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        return bound_ * (2.0 * u - 1.0);
      }
      case Kind::two_point: {
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        return u < probs_[0] ? values_[0] : values_[1];
      }
      case Kind::custom_moments:
        throw std::invalid_argument("a moments-only distribution cannot be sampled");
    }
    return 0.0;
  }

  std::string to_string() const {
    auto fmt = [](double v) {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
      return std::string(buf, p);
    };
    switch (kind_) {
      case Kind::rademacher: return "rademacher";
      case Kind::uniform_symmetric: return "uniform:" + fmt(bound_);
      case Kind::two_point: return "twopoint:" + fmt(values_[0]) + "," + fmt(values_[1]);
      case Kind::custom_moments: return "custom";
    }
    return "unknown";
  }

 private:
  DistributionSpec() = default;

  Kind kind_ = Kind::rademacher;
  double bound_ = 1.0;
  std::vector<double> values_;
  std::vector<double> probs_;
};

}  // namespace rsfluct
