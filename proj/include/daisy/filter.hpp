#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <vector>

#include "daisy/bit_array.hpp"
#include "daisy/common.hpp"
#include "daisy/distribution.hpp"
#include "daisy/hashing.hpp"
#include "daisy/planner.hpp"

namespace daisy {

// The filter proper: a bit array driven by a plan's per-element hash counts.
// Build is single-writer; once frozen, queries are safe from any number of
// threads (the probe instrumentation is the only mutable state and is atomic).
//
// `hash_writes` counts every slot write with multiplicity, including
// re-inserts of the same element, so it matches the sum of per-draw hash
// counts over the whole input sequence.
class DaisyFilter {
 public:
  DaisyFilter(std::shared_ptr<const FilterPlan> plan, std::uint64_t seed)
      : plan_(std::move(plan)), bits_(plan_->m_bits), seed_(seed) {}

  DaisyFilter(DaisyFilter&& o) noexcept
      : plan_(std::move(o.plan_)),
        bits_(std::move(o.bits_)),
        seed_(o.seed_),
        writes_(o.writes_),
        inserted_(o.inserted_),
        max_touch_(o.max_touch_.load(std::memory_order_relaxed)) {}

  void insert(element_id x) {
    check_id(x);
    const std::uint64_t k = plan_->k_int[x];
    const Hash128 h = element_hash(seed_, x);
    const std::uint64_t m = bits_.size_bits();
    for (std::uint64_t i = 1; i <= k; ++i) bits_.set((h.g1 + i * h.g2) % m);
    writes_ += k;
    ++inserted_;
    note_touch(static_cast<std::uint32_t>(k));
  }

  // YES iff all k probe bits are set; an element with k = 0 is always YES.
  bool query(element_id x) const {
    check_id(x);
    const std::uint64_t k = plan_->k_int[x];
    if (k == 0) return true;
    const Hash128 h = element_hash(seed_, x);
    const std::uint64_t m = bits_.size_bits();
    std::uint32_t probed = 0;
    for (std::uint64_t i = 1; i <= k; ++i) {
      ++probed;
      if (!bits_.test((h.g1 + i * h.g2) % m)) {
        note_touch(probed);
        return false;
      }
    }
    note_touch(probed);
    return true;
  }

  double zero_fraction() const {
    const double m = static_cast<double>(bits_.size_bits());
    return (m - static_cast<double>(bits_.popcount())) / m;
  }

  const FilterPlan& plan() const { return *plan_; }
  std::shared_ptr<const FilterPlan> plan_ptr() const { return plan_; }
  const BitArray& bits() const { return bits_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t hash_writes() const { return writes_; }  // X
  std::uint64_t inserted() const { return inserted_; }
  std::uint64_t popcount() const { return bits_.popcount(); }
  std::uint32_t max_op_touch() const {
    return max_touch_.load(std::memory_order_relaxed);
  }

 private:
  void check_id(element_id x) const {
    if (x >= plan_->universe->size())
      throw std::invalid_argument("filter: element id outside universe");
  }

  void note_touch(std::uint32_t t) const {
    std::uint32_t cur = max_touch_.load(std::memory_order_relaxed);
    while (t > cur && !max_touch_.compare_exchange_weak(
                          cur, t, std::memory_order_relaxed)) {
    }
  }

  std::shared_ptr<const FilterPlan> plan_;
  BitArray bits_;
  std::uint64_t seed_;
  std::uint64_t writes_ = 0;
  std::uint64_t inserted_ = 0;
  mutable std::atomic<std::uint32_t> max_touch_{0};
};

// Inserts every draw in order, duplicates included, so hash_writes() ends up
// as the per-draw hash-count total.
inline DaisyFilter build(std::shared_ptr<const FilterPlan> plan,
                         const SampledSet& s, std::uint64_t seed) {
  if (!plan) throw std::invalid_argument("build: null plan");
  if (plan->universe->size() != s.universe_size)
    throw std::invalid_argument("build: plan and sample disagree on universe");
  DaisyFilter f(std::move(plan), seed);
  for (element_id x : s.draws) f.insert(x);
  return f;
}

// -------------------------------------------------------------------------
// Snapshot file: magic "DAISYBF1" (8 bytes), m_bits (u64 LE), seed (u64 LE),
// then the bit array packed into 64-bit little-endian words. The plan is not
// part of the snapshot.

namespace detail {
inline void put_u64le(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}
inline std::uint64_t get_u64le(std::istream& is) {
  char b[8];
  if (!is.read(b, 8)) throw format_error("snapshot: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}
}  // namespace detail

inline constexpr char kSnapshotMagic[8] = {'D', 'A', 'I', 'S', 'Y', 'B', 'F', '1'};

struct FilterSnapshot {
  std::uint64_t m_bits = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> words;
};

inline void save_snapshot(const DaisyFilter& f, std::ostream& os) {
  os.write(kSnapshotMagic, 8);
  detail::put_u64le(os, f.bits().size_bits());
  detail::put_u64le(os, f.seed());
  for (std::uint64_t w : f.bits().words()) detail::put_u64le(os, w);
  if (!os) throw format_error("snapshot: write failed");
}

inline void save_snapshot(const DaisyFilter& f, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("snapshot: cannot open " + path.string());
  save_snapshot(f, os);
}

inline FilterSnapshot load_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8)) throw format_error("snapshot: truncated header");
  for (int i = 0; i < 8; ++i)
    if (magic[i] != kSnapshotMagic[i]) throw format_error("snapshot: bad magic");
  FilterSnapshot s;
  s.m_bits = detail::get_u64le(is);
  if (s.m_bits == 0) throw format_error("snapshot: zero-length bit array");
  s.seed = detail::get_u64le(is);
  const std::uint64_t nwords = (s.m_bits + 63) / 64;
  s.words.reserve(nwords);
  for (std::uint64_t i = 0; i < nwords; ++i) s.words.push_back(detail::get_u64le(is));
  return s;
}

inline FilterSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("snapshot: cannot open " + path.string());
  return load_snapshot(is);
}

}  // namespace daisy
