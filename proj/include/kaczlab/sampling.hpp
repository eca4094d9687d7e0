#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "kaczlab/dense.hpp"
#include "kaczlab/rng.hpp"

namespace kaczlab {

/// Sorted list of 0-based row indices.
using Block = std::vector<std::size_t>;

/// Every tau-subset of [m] is drawn with probability 1 / C(m, tau).
struct UniformSubset {
  std::size_t m = 0;
  std::size_t tau = 0;
};

/// Block l of a fixed partition of [m] is drawn with probability probs[l].
struct Partition {
  std::size_t m = 0;
  std::vector<Block> blocks;
  Vector probs;
};

/// Probability space over row subsets. Construct through the named
/// factories; they validate the invariants (1 <= tau <= m; blocks disjoint,
/// covering [m]; probabilities nonnegative and summing to 1 within 1e-12).
class SamplingSpec {
 public:
  /// Placeholder (m = 0); rejected by every consumer until replaced.
  SamplingSpec() = default;
  static SamplingSpec uniform_subset(std::size_t m, std::size_t tau);
  static SamplingSpec partition(std::size_t m, std::vector<Block> blocks, Vector probs);
  /// P(J_l) = 1 / ell
  static SamplingSpec partition_uniform(std::size_t m, std::vector<Block> blocks);
  /// P(J_l) = |A_{J_l}|_F^2 / |A|_F^2
  static SamplingSpec partition_frobenius(const DenseMatrix& a, std::vector<Block> blocks);
  /// Single block [m] with probability 1.
  static SamplingSpec full_batch(std::size_t m);

  std::size_t rows() const noexcept;
  bool is_uniform() const noexcept { return std::holds_alternative<UniformSubset>(variant_); }
  const UniformSubset* as_uniform() const noexcept { return std::get_if<UniformSubset>(&variant_); }
  const Partition* as_partition() const noexcept { return std::get_if<Partition>(&variant_); }

  /// Smallest and largest support size with positive probability.
  std::size_t min_block_size() const noexcept;
  std::size_t max_block_size() const noexcept;

 private:
  explicit SamplingSpec(std::variant<UniformSubset, Partition> v) : variant_(std::move(v)) {}
  std::variant<UniformSubset, Partition> variant_;
};

/// Draws J ~ P. The returned block is sorted ascending.
Block sample_block(const SamplingSpec& spec, Rng& rng);

/// p_i = P(i in J) for a 0-based index i. Throws IndexOutOfRange.
double membership_probability(const SamplingSpec& spec, std::size_t i);

/// Random partition of [m] into ell near-equal contiguous runs of a uniform
/// permutation. Blocks are stored sorted.
struct Paving {
  std::size_t m = 0;
  std::size_t ell = 0;
  std::uint64_t seed = 0;
  std::vector<Block> blocks;
};

Paving build_random_paving(Rng& rng, std::size_t m, std::size_t ell, std::uint64_t seed_tag = 0);
Paving build_random_paving(std::uint64_t seed, std::size_t m, std::size_t ell);

/// Partition sampling over the paving blocks with P(J_l) = 1/ell.
SamplingSpec paving_sampling(const Paving& paving);

/// Blocks {0..b-1}, {b..2b-1}, ...; the last block takes the remainder.
std::vector<Block> aligned_blocks(std::size_t m, std::size_t block_size);

struct Support {
  Block block;
  double probability = 0.0;
};

inline constexpr std::uint64_t kSupportEnumerationCap = 100000;

/// C(n, k), or nullopt once the value exceeds `cap`.
std::optional<std::uint64_t> binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap);

/// Every support of P with its probability. Uniform subsets are listed in
/// lexicographic order; throws TooLarge when C(m, tau) exceeds `cap`.
std::vector<Support> enumerate_supports(const SamplingSpec& spec,
                                        std::uint64_t cap = kSupportEnumerationCap);

}  // namespace kaczlab
