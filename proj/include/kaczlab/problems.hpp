#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "kaczlab/dense.hpp"
#include "kaczlab/rng.hpp"

namespace kaczlab {

enum class RecipeKind { GaussianNormalized, RankDeficient, CoherentRows, OrthonormalBlocks };

/// Generated systems have unit rows and b = A x_planted with a standard
/// Gaussian x_planted, so they are consistent by construction.
///   GaussianNormalized  i.i.d. N(0,1) entries
///   RankDeficient       U diag(1, 2, ..., rank) V^T with random orthonormal U, V
///   CoherentRows        row i = normalize((1 - c) g_i / |g_i| + c u) for a shared unit u
///   OrthonormalBlocks   m / block_size stacked blocks, each with orthonormal rows
struct ProblemRecipe {
  RecipeKind kind = RecipeKind::GaussianNormalized;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t rank = 0;
  double coherence = 0.0;
  std::size_t block_size = 0;
  std::uint64_t seed = 0;
};

/// `gaussian:MxN`, `rankdef:MxN:rank`, `coherent:MxN:c`, `orthoblocks:MxN:block`.
/// Throws Parse or BadDimensions.
ProblemRecipe parse_recipe(std::string_view text, std::uint64_t seed = 0);
std::string to_string(const ProblemRecipe& recipe);

/// Throws BadDimensions.
LinearSystem generate_problem(const ProblemRecipe& recipe);

/// n x n Haar-like orthogonal matrix (Gram-Schmidt on Gaussian rows).
DenseMatrix random_orthogonal(Rng& rng, std::size_t n);

}  // namespace kaczlab
