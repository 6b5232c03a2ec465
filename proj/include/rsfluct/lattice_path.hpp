#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsfluct {

enum class Step : std::int8_t { down = -1, flat = 0, up = 1 };

constexpr int increment(Step s) noexcept { return static_cast<int>(s); }

constexpr char step_letter(Step s) noexcept {
  switch (s) {
    case Step::up: return 'U';
    case Step::down: return 'D';
    case Step::flat: return 'F';
  }
  return '?';
}

/// A path on Z starting at the origin; each step moves the level by -1, 0 or +1.
class LatticePath {
 public:
  LatticePath() = default;
  explicit LatticePath(std::vector<Step> steps) : steps_(std::move(steps)) {}

  /// Reads a word over {U, D, F} (case-insensitive).
  static LatticePath parse(std::string_view word) {
    std::vector<Step> steps;
    steps.reserve(word.size());
    for (char c : word) {
      switch (c) {
        case 'U': case 'u': steps.push_back(Step::up); break;
        case 'D': case 'd': steps.push_back(Step::down); break;
        case 'F': case 'f': steps.push_back(Step::flat); break;
        default: throw std::invalid_argument("bad step letter in path '" + std::string(word) + "'");
      }
    }
    return LatticePath(std::move(steps));
  }

  const std::vector<Step>& steps() const noexcept { return steps_; }
  std::size_t length() const noexcept { return steps_.size(); }

  /// y_0 .. y_k with y_0 = 0.
  std::vector<int> levels() const {
    std::vector<int> y(steps_.size() + 1, 0);
    for (std::size_t t = 0; t < steps_.size(); ++t) y[t + 1] = y[t] + increment(steps_[t]);
    return y;
  }

  int end_level() const noexcept {
    int y = 0;
    for (Step s : steps_) y += increment(s);
    return y;
  }

  bool closed() const noexcept { return end_level() == 0; }

  std::size_t flat_count() const noexcept {
    return static_cast<std::size_t>(std::count(steps_.begin(), steps_.end(), Step::flat));
  }

  std::string to_string() const {
    std::string out;
    out.reserve(steps_.size());
    for (Step s : steps_) out += step_letter(s);
    return out;
  }

  friend bool operator==(const LatticePath&, const LatticePath&) = default;
  friend bool operator<(const LatticePath& a, const LatticePath& b) { return a.steps_ < b.steps_; }

 private:
  std::vector<Step> steps_;
};

}  // namespace rsfluct
