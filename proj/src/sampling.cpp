#include "kaczlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kaczlab {

SamplingSpec SamplingSpec::uniform_subset(std::size_t m, std::size_t tau) {
  if (m == 0 || tau == 0 || tau > m) {
    throw Error(ErrorKind::BadSampling, "uniform subset needs 1 <= tau <= m (tau=" +
                                            std::to_string(tau) + ", m=" + std::to_string(m) +
                                            ")");
  }
  return SamplingSpec(UniformSubset{m, tau});
}

SamplingSpec SamplingSpec::partition(std::size_t m, std::vector<Block> blocks, Vector probs) {
  if (m == 0 || blocks.empty()) throw Error(ErrorKind::BadSampling, "empty partition");
  if (probs.size() != blocks.size()) {
    throw Error(ErrorKind::BadSampling, "one probability per block required");
  }
  std::vector<char> seen(m, 0);
  std::size_t covered = 0;
  for (auto& blk : blocks) {
    if (blk.empty()) throw Error(ErrorKind::BadSampling, "partition block is empty");
    std::sort(blk.begin(), blk.end());
    for (std::size_t i : blk) {
      if (i >= m) throw Error(ErrorKind::IndexOutOfRange, "block index " + std::to_string(i));
      if (seen[i]) throw Error(ErrorKind::BadSampling, "row " + std::to_string(i) + " repeated");
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != m) throw Error(ErrorKind::BadSampling, "blocks do not cover all rows");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::BadSampling, "block probabilities must be nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::BadSampling, "block probabilities sum to " + std::to_string(total));
  }
  return SamplingSpec(Partition{m, std::move(blocks), std::move(probs)});
}

SamplingSpec SamplingSpec::partition_uniform(std::size_t m, std::vector<Block> blocks) {
  Vector probs(blocks.size(), blocks.empty() ? 0.0 : 1.0 / static_cast<double>(blocks.size()));
  return partition(m, std::move(blocks), std::move(probs));
}

SamplingSpec SamplingSpec::partition_frobenius(const DenseMatrix& a, std::vector<Block> blocks) {
  const Vector norms = row_norms_sq(a);
  const double total = std::accumulate(norms.begin(), norms.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorKind::BadSampling, "zero matrix");
  Vector probs;
  probs.reserve(blocks.size());
  for (const auto& blk : blocks) {
    double s = 0.0;
    for (std::size_t i : blk) {
      if (i >= a.rows()) throw Error(ErrorKind::IndexOutOfRange, "block index");
      s += norms[i];
    }
    probs.push_back(s / total);
  }
  return partition(a.rows(), std::move(blocks), std::move(probs));
}

SamplingSpec SamplingSpec::full_batch(std::size_t m) {
  Block all(m);
  std::iota(all.begin(), all.end(), 0);
  return partition(m, {std::move(all)}, {1.0});
}

std::size_t SamplingSpec::rows() const noexcept {
  if (const auto* u = as_uniform()) return u->m;
  return as_partition()->m;
}

std::size_t SamplingSpec::min_block_size() const noexcept {
  if (const auto* u = as_uniform()) return u->tau;
  const auto* p = as_partition();
  std::size_t best = p->m;
  for (std::size_t l = 0; l < p->blocks.size(); ++l) {
    if (p->probs[l] > 0.0) best = std::min(best, p->blocks[l].size());
  }
  return best;
}

std::size_t SamplingSpec::max_block_size() const noexcept {
  if (const auto* u = as_uniform()) return u->tau;
  const auto* p = as_partition();
  std::size_t best = 0;
  for (std::size_t l = 0; l < p->blocks.size(); ++l) {
    if (p->probs[l] > 0.0) best = std::max(best, p->blocks[l].size());
  }
  return best;
}

Block sample_block(const SamplingSpec& spec, Rng& rng) {
  if (const auto* u = spec.as_uniform()) {
    if (u->tau == 1) return Block{uniform_index(rng, u->m)};
    // Floyd's algorithm: each tau-subset is equally likely.
    Block chosen;
    chosen.reserve(u->tau);
    std::vector<char> marked;
    const bool use_marks = u->tau > 64;
    if (use_marks) marked.assign(u->m, 0);
    for (std::size_t j = u->m - u->tau; j < u->m; ++j) {
      const std::size_t t = uniform_index(rng, j + 1);
      const bool present = use_marks ? marked[t] != 0
                                     : std::find(chosen.begin(), chosen.end(), t) != chosen.end();
      const std::size_t pick = present ? j : t;
      chosen.push_back(pick);
      if (use_marks) marked[pick] = 1;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }
  const auto* p = spec.as_partition();
  const double u = uniform_unit(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t l = 0; l < p->blocks.size(); ++l) {
    if (p->probs[l] <= 0.0) continue;
    last_positive = l;
    cumulative += p->probs[l];
    if (u < cumulative) return p->blocks[l];
  }
  return p->blocks[last_positive];
}

double membership_probability(const SamplingSpec& spec, std::size_t i) {
  if (i >= spec.rows()) {
    throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(i) + " outside [m]");
  }
  if (const auto* u = spec.as_uniform()) {
    return static_cast<double>(u->tau) / static_cast<double>(u->m);
  }
  const auto* p = spec.as_partition();
  for (std::size_t l = 0; l < p->blocks.size(); ++l) {
    if (std::binary_search(p->blocks[l].begin(), p->blocks[l].end(), i)) return p->probs[l];
  }
  return 0.0;  // unreachable for a valid partition
}

Paving build_random_paving(Rng& rng, std::size_t m, std::size_t ell, std::uint64_t seed_tag) {
  if (ell == 0 || ell > m) {
    throw Error(ErrorKind::BadBlockCount,
                "need 1 <= ell <= m (ell=" + std::to_string(ell) + ", m=" + std::to_string(m) + ")");
  }
  const auto perm = random_permutation(rng, m);
  Paving out{m, ell, seed_tag, {}};
  out.blocks.reserve(ell);
  for (std::size_t l = 0; l < ell; ++l) {
    // run l covers permuted positions [floor(l m / ell), floor((l+1) m / ell))
    const std::size_t lo = l * m / ell;
    const std::size_t hi = (l + 1) * m / ell;
    Block blk(perm.begin() + static_cast<std::ptrdiff_t>(lo),
              perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(blk.begin(), blk.end());
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

Paving build_random_paving(std::uint64_t seed, std::size_t m, std::size_t ell) {
  Rng rng = make_rng(seed);
  return build_random_paving(rng, m, ell, seed);
}

SamplingSpec paving_sampling(const Paving& paving) {
  return SamplingSpec::partition_uniform(paving.m, paving.blocks);
}

std::vector<Block> aligned_blocks(std::size_t m, std::size_t block_size) {
  if (block_size == 0) throw Error(ErrorKind::BadBlockCount, "block size 0");
  std::vector<Block> blocks;
  for (std::size_t start = 0; start < m; start += block_size) {
    Block blk;
    for (std::size_t i = start; i < std::min(m, start + block_size); ++i) blk.push_back(i);
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

std::optional<std::uint64_t> binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n, i) = C(n, i-1) (n - i + 1) / i stays integral at every step.
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - i + 1) / i;
    if (c > cap) return std::nullopt;
  }
  return static_cast<std::uint64_t>(c);
}

std::vector<Support> enumerate_supports(const SamplingSpec& spec, std::uint64_t cap) {
  std::vector<Support> out;
  if (const auto* p = spec.as_partition()) {
    for (std::size_t l = 0; l < p->blocks.size(); ++l) {
      out.push_back({p->blocks[l], p->probs[l]});
    }
    return out;
  }
  const auto* u = spec.as_uniform();
  const auto count = binomial_capped(u->m, u->tau, cap);
  if (!count) {
    throw Error(ErrorKind::TooLarge, "C(" + std::to_string(u->m) + ", " +
                                         std::to_string(u->tau) + ") exceeds " +
                                         std::to_string(cap));
  }
  const double prob = 1.0 / static_cast<double>(*count);
  out.reserve(*count);
  Block comb(u->tau);
  std::iota(comb.begin(), comb.end(), 0);
  for (;;) {
    out.push_back({comb, prob});
    // next combination in lexicographic order
    std::size_t pos = u->tau;
    while (pos > 0 && comb[pos - 1] == u->m - u->tau + pos - 1) --pos;
    if (pos == 0) break;
    ++comb[pos - 1];
    for (std::size_t j = pos; j < u->tau; ++j) comb[j] = comb[j - 1] + 1;
  }
  return out;
}

}  // namespace kaczlab
