#ifndef ENTAILPROF_COMMON_HPP_
#define ENTAILPROF_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace entailprof {

/// Bad input: malformed records, violated preconditions, inconsistent
/// configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable/unwritable files. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hashing and seeding
// ---------------------------------------------------------------------------

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-component seed: mix64(seed ^ fnv1a64(component)). Every random
/// stream in the library is derived from the run seed this way.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  return mix64(seed ^ fnv1a64(component));
}

/// Small portable PRNG (xoshiro256**), seeded through SplitMix64.
///
/// The standard distributions are implementation-defined, so the helpers
/// below are used instead to keep streams identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform();

  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// True if the string has at least one non-whitespace character.
bool has_content(std::string_view s);

}  // namespace entailprof

#endif  // ENTAILPROF_COMMON_HPP_
