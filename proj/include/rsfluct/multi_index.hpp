#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rsfluct {

/// Finitely supported map from lattice levels to flat-step counts, stored in
/// canonical form: the smallest stored offset is always 0. When the index was
/// read off a concrete placement, the original minimal support point is kept
/// in iota().
class MultiIndex {
 public:
  using Entry = std::pair<int, unsigned>;

  MultiIndex() = default;

  /// Canonicalizes an arbitrary level -> count map. Zero counts are dropped.
  static MultiIndex from_levels(const std::map<int, unsigned>& counts) {
    MultiIndex out;
    for (const auto& [level, count] : counts) {
      if (count > 0) out.entries_.emplace_back(level, count);
    }
    out.normalize();
    return out;
  }

  static MultiIndex from_entries(std::vector<Entry> entries) {
    std::map<int, unsigned> merged;
    for (const auto& [level, count] : entries) merged[level] += count;
    return from_levels(merged);
  }

  /// count * delta
  static MultiIndex single(unsigned count = 1) {
    MultiIndex out;
    if (count > 0) out.entries_.emplace_back(0, count);
    return out;
  }

  static MultiIndex delta() { return single(1); }

  /// delta + delta^s, i.e. one flat at offset 0 and one at offset s.
  static MultiIndex delta_pair(int s) {
    if (s == 0) return single(2);
    return from_levels({{0, 1u}, {s, 1u}});
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }

  bool is_zero() const noexcept { return entries_.empty(); }

  unsigned weight() const noexcept {
    unsigned w = 0;
    for (const auto& e : entries_) w += e.second;
    return w;
  }

  /// Largest offset in the support (0 for the zero index).
  int span() const noexcept { return entries_.empty() ? 0 : entries_.back().first; }

  unsigned at(int offset) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{offset, 0u},
                               [](const Entry& a, const Entry& b) { return a.first < b.first; });
    return (it != entries_.end() && it->first == offset) ? it->second : 0u;
  }

  std::optional<int> iota() const noexcept { return iota_; }

  MultiIndex with_iota(int iota) const {
    MultiIndex copy = *this;
    copy.iota_ = iota;
    return copy;
  }

  /// Human-readable form, e.g. "2delta", "delta+delta^1", "0".
  std::string to_string() const {
    if (entries_.empty()) return "0";
    std::string out;
    for (const auto& [offset, count] : entries_) {
      if (!out.empty()) out += '+';
      if (count != 1) out += std::to_string(count);
      out += "delta";
      if (offset != 0) out += "^" + std::to_string(offset);
    }
    return out;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept {
    return a.entries_ == b.entries_;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) noexcept {
    return a.entries_ < b.entries_;
  }

 private:
  void normalize() {
    std::sort(entries_.begin(), entries_.end());
    if (entries_.empty()) {
      iota_.reset();
      return;
    }
    const int shift = entries_.front().first;
    iota_ = shift;
    for (auto& e : entries_) e.first -= shift;
  }

  std::vector<Entry> entries_;
  std::optional<int> iota_;
};

/// Parses "0", "delta", "2delta", "delta+delta^1", "3delta^2+delta". The
/// unicode letter is accepted too ("2δ+δ^1").
inline MultiIndex parse_multi_index(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("malformed multi-index: '" + std::string(text) + "'"); };
  if (text == "0" || text == "zero") return MultiIndex{};
  if (text.empty() || text.back() == '+') fail();
  std::map<int, unsigned> levels;
  while (!text.empty()) {
    const auto plus = text.find('+');
    std::string_view term = text.substr(0, plus);
    text = plus == std::string_view::npos ? std::string_view{} : text.substr(plus + 1);
    if (term.empty()) fail();

    unsigned count = 1;
    std::size_t pos = 0;
    while (pos < term.size() && term[pos] >= '0' && term[pos] <= '9') ++pos;
    if (pos > 0) {
      auto [p, ec] = std::from_chars(term.data(), term.data() + pos, count);
      if (ec != std::errc{} || count == 0) fail();
    }
    term.remove_prefix(pos);
    if (term.starts_with("delta")) {
      term.remove_prefix(5);
    } else if (term.starts_with("\xCE\xB4")) {  // UTF-8 small delta
      term.remove_prefix(2);
    } else {
      fail();
    }
    int offset = 0;
    if (!term.empty()) {
      if (term.front() != '^') fail();
      term.remove_prefix(1);
      auto [p, ec] = std::from_chars(term.data(), term.data() + term.size(), offset);
      if (ec != std::errc{} || p != term.data() + term.size()) fail();
    }
    levels[offset] += count;
  }
  return MultiIndex::from_levels(levels);
}

}  // namespace rsfluct
