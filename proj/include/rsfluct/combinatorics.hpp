#pragma once

// Closed lattice paths with flat steps and their flat-step level profiles.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rsfluct/lattice_path.hpp"
#include "rsfluct/multi_index.hpp"

namespace rsfluct {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr int default_enumeration_cap = 14;

// Counts are held in 64 bits; 3^40 still fits, so no cap may exceed this.
inline constexpr int hard_enumeration_cap = 40;

class cap_exceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline void check_length(int k, int cap, const char* what) {
  if (k < 0) throw std::invalid_argument(std::string(what) + ": negative path length");
  if (cap > hard_enumeration_cap) {
    throw std::invalid_argument(std::string(what) + ": enumeration cap above " +
                                std::to_string(hard_enumeration_cap));
  }
  if (k > cap) {
    throw cap_exceeded(std::string(what) + ": path length " + std::to_string(k) +
                       " exceeds the enumeration cap " + std::to_string(cap) +
                       " (raise the cap explicitly or use a closed form)");
  }
}

/// Thread-safe memo keyed by path length. Entries are never evicted, so the
/// returned references stay valid for the program lifetime.
template <class Value, class Build>
const Value& memo_by_length(int k, Build&& build) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const Value>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(k); it != cache.end()) return *it->second;
  }
  auto fresh = std::make_unique<const Value>(build());
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(k, std::move(fresh));
  return *it->second;
}

}  // namespace detail

/// Depth-first walk over every closed path of length k (y_0 = y_k = 0), in
/// lexicographic order with D < F < U. Branches that can no longer return to
/// the origin are pruned. The visitor receives the steps and the levels
/// y_0..y_k of each path.
template <class Visitor>
void for_each_closed_path(int k, Visitor&& visit, int cap = default_enumeration_cap) {
  detail::check_length(k, cap, "closed path enumeration");
  std::vector<Step> steps(static_cast<std::size_t>(k));
  std::vector<int> levels(static_cast<std::size_t>(k) + 1, 0);
  const std::span<const Step> step_view(steps);
  const std::span<const int> level_view(levels);

  auto recurse = [&](auto&& self, int t) -> void {
    if (t == k) {
      visit(step_view, level_view);
      return;
    }
    const int remaining = k - t - 1;
    for (Step s : {Step::down, Step::flat, Step::up}) {
      const int next = levels[static_cast<std::size_t>(t)] + increment(s);
      if (next > remaining || -next > remaining) continue;
      steps[static_cast<std::size_t>(t)] = s;
      levels[static_cast<std::size_t>(t) + 1] = next;
      self(self, t + 1);
    }
  };
  recurse(recurse, 0);
}

inline std::vector<LatticePath> enumerate_closed_paths(int k, int cap = default_enumeration_cap) {
  std::vector<LatticePath> out;
  for_each_closed_path(
      k,
      [&](std::span<const Step> steps, std::span<const int>) {
        out.emplace_back(std::vector<Step>(steps.begin(), steps.end()));
      },
      cap);
  return out;
}

/// Flat-step levels of a path as an (uncanonicalized) level -> count map.
inline std::map<int, unsigned> flat_levels(std::span<const Step> steps) {
  std::map<int, unsigned> counts;
  int y = 0;
  for (Step s : steps) {
    if (s == Step::flat) ++counts[y];
    y += increment(s);
  }
  return counts;
}

inline MultiIndex flat_profile(const LatticePath& path) {
  return MultiIndex::from_levels(flat_levels(path.steps()));
}

inline int path_range(const LatticePath& path) {
  const auto y = path.levels();
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo;
}

/// Closed paths of one length grouped by everything that matters for
/// placing them on [1, N]: level extent and the flat levels relative to the
/// start.
struct PathSummary {
  int min_level = 0;
  int max_level = 0;
  std::vector<MultiIndex::Entry> flats;  // absolute level -> count, sorted
  std::uint64_t multiplicity = 0;
};

inline const std::vector<PathSummary>& path_summaries(int k, int cap = default_enumeration_cap) {
  detail::check_length(k, cap, "path summaries");
  return detail::memo_by_length<std::vector<PathSummary>>(k, [k] {
    using Key = std::tuple<int, int, std::vector<MultiIndex::Entry>>;
    std::map<Key, std::uint64_t> grouped;
    for_each_closed_path(
        k,
        [&](std::span<const Step> steps, std::span<const int> levels) {
          const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
          const auto flats = flat_levels(steps);
          ++grouped[Key{*lo, *hi, {flats.begin(), flats.end()}}];
        },
        hard_enumeration_cap);
    std::vector<PathSummary> out;
    out.reserve(grouped.size());
    for (auto& [key, count] : grouped) {
      out.push_back(PathSummary{std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
    }
    return out;
  });
}

/// p^k(beta) for every canonical beta with a nonzero count.
using ProfileTable = std::map<MultiIndex, std::uint64_t>;

inline const ProfileTable& profile_table(int k, int cap = default_enumeration_cap) {
  detail::check_length(k, cap, "profile table");
  return detail::memo_by_length<ProfileTable>(k, [k] {
    ProfileTable table;
    for (const auto& summary : path_summaries(k, hard_enumeration_cap)) {
      table[MultiIndex::from_entries(summary.flats)] += summary.multiplicity;
    }
    return table;
  });
}

/// Number of closed length-k paths whose flat profile is beta up to translation.
inline std::uint64_t count_p(int k, const MultiIndex& beta, int cap = default_enumeration_cap) {
  const auto& table = profile_table(k, cap);
  const auto it = table.find(beta);
  return it == table.end() ? 0 : it->second;
}

/// sum over |beta| = j of p^l(beta), i.e. closed length-l paths with exactly j flats.
inline std::uint64_t sum_p_by_weight(int l, int j, int cap = default_enumeration_cap) {
  std::uint64_t total = 0;
  for (const auto& [beta, count] : profile_table(l, cap)) {
    if (static_cast<int>(beta.weight()) == j) total += count;
  }
  return total;
}

inline BigInt binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt out = 1;
  for (long i = 1; i <= k; ++i) {
    out *= n - k + i;
    out /= i;
  }
  return out;
}

/// Upper bound C(l, j) C(l-j, (l-j)/2) on sum_p_by_weight; zero for odd l - j.
inline BigInt weight_bound(int l, int j) {
  if (j < 0 || j > l || (l - j) % 2 != 0) return 0;
  return binomial(l, j) * binomial(l - j, (l - j) / 2);
}

/// Total number of closed paths of length k.
inline BigInt closed_path_count(int k) {
  BigInt total = 0;
  for (int f = k % 2; f <= k; f += 2) total += weight_bound(k, f);
  return total;
}

/// p^k(delta) = k C(k-1, (k-1)/2) for odd k, 0 otherwise.
inline BigInt p_delta_closed(int k) {
  if (k <= 0 || k % 2 == 0) return 0;
  return BigInt(k) * binomial(k - 1, (k - 1) / 2);
}

/// p^j(2 delta) = j 2^(j-3) for even j >= 2.
inline BigInt p_twodelta_closed(int j) {
  if (j < 2 || j % 2 != 0) {
    throw std::invalid_argument("p_twodelta_closed: j must be an even integer >= 2, got " +
                                std::to_string(j));
  }
  BigInt out = j / 2;
  out <<= static_cast<unsigned>(j - 2);
  return out;
}

/// Number of +-1 walks of length n with net displacement d.
inline BigInt free_walks(int n, int d) {
  if (n < 0 || (n + d) % 2 != 0 || d > n || -d > n) return 0;
  return binomial(n, (n + d) / 2);
}

/// p^j(delta + delta^s): closed paths with exactly two flats whose levels
/// differ by s (s = 0 gives p^j(2 delta)). Counted by splitting the path at
/// its two flats into three free walks, so no length cap applies.
inline BigInt count_two_flats(int j, int s) {
  if (s < 0) s = -s;
  if (j < 2) return 0;
  const int free_steps = j - 2;
  BigInt total = 0;
  for (int n1 = 0; n1 <= free_steps; ++n1) {
    for (int n2 = 0; n1 + n2 <= free_steps; ++n2) {
      const int n3 = free_steps - n1 - n2;
      for (int a = -n1; a <= n1; ++a) {
        const BigInt first = free_walks(n1, a);
        if (first == 0) continue;
        for (int sign : {1, -1}) {
          if (s == 0 && sign < 0) break;
          const int b = a + sign * s;
          total += first * free_walks(n2, b - a) * free_walks(n3, -b);
        }
      }
    }
  }
  return total;
}

}  // namespace rsfluct
