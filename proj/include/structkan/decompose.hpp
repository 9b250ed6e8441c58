#pragma once

// Decomposability detector for f = w(u(x_A), v(x_B)) with scalar u and v.
// When f has that shape, the gradient restricted to block A points along
// grad u(x_A) scaled by a factor that may depend on everything; its
// *direction* is a function of x_A alone. The score therefore probes fixed
// x_A values, samples x_B, and measures the variance of the sign-normalized
// unit restricted gradient; the symmetric term swaps the blocks. Near-zero
// score is consistent with the nested shape, a large score rules it out.
// This is a necessary condition only; a low score does not prove the
// decomposition exists.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "structkan/expr.hpp"
#include "structkan/rng.hpp"
#include "structkan/threads.hpp"

namespace structkan {

struct DecomposabilityReport {
  double score = 0.0;  // block_a_term + block_b_term
  double block_a_term = 0.0;
  double block_b_term = 0.0;
  // A block is degenerate when over half of its gradient evaluations were
  // skipped for vanishing norm (or no probe kept enough samples to measure
  // a variance). A degenerate block contributes 0 and is reported here.
  bool block_a_degenerate = false;
  bool block_b_degenerate = false;
  int skipped_a = 0;
  int skipped_b = 0;
  int evals_per_block = 0;  // n_probes outer probes times n_probes inner samples
};

namespace detail {

struct BlockTerm {
  double term = 0.0;
  bool degenerate = false;
  int skipped = 0;
};

// One half of the score: hold the block's coordinates fixed per probe,
// resample the complement, and average the per-probe total variance of the
// unit restricted gradient. Randomness is split per probe with
// derive_seed(seed, tag, probe_index), so the parallel loop below cannot
// reorder draws no matter how the probes are scheduled.
inline BlockTerm block_term(const ExprTree& expr, std::span<const int> block,
                            std::span<const int> complement, int n_probes,
                            std::uint64_t seed, std::string_view tag) {
  const int dim = expr.variable_count();
  const std::size_t width = block.size();
  // NaN marks probes that kept fewer than two usable gradients.
  std::vector<double> probe_variance(static_cast<std::size_t>(n_probes),
                                     std::numeric_limits<double>::quiet_NaN());
  std::vector<int> probe_skipped(static_cast<std::size_t>(n_probes), 0);

  parallel_for(n_probes, [&](int p) {
    Rng rng(derive_seed(seed, tag, static_cast<std::uint64_t>(p)));
    std::vector<double> point(static_cast<std::size_t>(dim), 0.0);
    for (int k : block) point[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);

    // Welford accumulators per component; identical directions yield an
    // exact zero variance, which the decomposable case relies on.
    std::vector<double> mean(width, 0.0);
    std::vector<double> m2(width, 0.0);
    std::vector<double> dir(width, 0.0);
    int kept = 0;
    int skipped = 0;
    for (int j = 0; j < n_probes; ++j) {
      for (int k : complement) point[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);
      const std::vector<double> g = expr.grad(point);
      double norm_sq = 0.0;
      for (std::size_t i = 0; i < width; ++i) {
        dir[i] = g[static_cast<std::size_t>(block[i])];
        norm_sq += dir[i] * dir[i];
      }
      const double norm = std::sqrt(norm_sq);
      if (norm < 1e-9) {
        ++skipped;
        continue;
      }
      for (std::size_t i = 0; i < width; ++i) dir[i] /= norm;
      // Sign convention: flip so the first nonzero component is positive,
      // otherwise the +/- ambiguity of a direction would inflate variance.
      for (std::size_t i = 0; i < width; ++i) {
        if (dir[i] == 0.0) continue;
        if (dir[i] < 0.0)
          for (std::size_t k = 0; k < width; ++k) dir[k] = -dir[k];
        break;
      }
      ++kept;
      for (std::size_t i = 0; i < width; ++i) {
        const double delta = dir[i] - mean[i];
        mean[i] += delta / kept;
        m2[i] += delta * (dir[i] - mean[i]);
      }
    }
    probe_skipped[static_cast<std::size_t>(p)] = skipped;
    if (kept >= 2) {
      double total = 0.0;
      for (std::size_t i = 0; i < width; ++i) total += m2[i];
      probe_variance[static_cast<std::size_t>(p)] = total / kept;
    }
  });

  BlockTerm out;
  int probes_used = 0;
  double sum = 0.0;
  for (int p = 0; p < n_probes; ++p) {
    out.skipped += probe_skipped[static_cast<std::size_t>(p)];
    const double v = probe_variance[static_cast<std::size_t>(p)];
    if (!std::isnan(v)) {
      sum += v;
      ++probes_used;
    }
  }
  const long total_evals = static_cast<long>(n_probes) * n_probes;
  out.degenerate = 2L * out.skipped > total_evals || probes_used == 0;
  out.term = out.degenerate ? 0.0 : sum / probes_used;
  return out;
}

inline void validate_partition(int dim, std::span<const int> block_a,
                               std::span<const int> block_b) {
  if (block_a.size() < 2 || block_b.size() < 2)
    throw std::invalid_argument("each partition block needs at least 2 inputs");
  std::vector<int> count(static_cast<std::size_t>(dim), 0);
  for (std::span<const int> block : {block_a, block_b}) {
    for (int k : block) {
      if (k < 0 || k >= dim)
        throw std::invalid_argument("partition index " + std::to_string(k) +
                                    " is out of range for " + std::to_string(dim) +
                                    " inputs");
      if (++count[static_cast<std::size_t>(k)] > 1)
        throw std::invalid_argument("partition not disjoint");
    }
  }
  for (int k = 0; k < dim; ++k)
    if (count[static_cast<std::size_t>(k)] == 0)
      throw std::invalid_argument("partition must cover every input");
}

}  // namespace detail

// Probes are drawn uniformly from [-1, 1]^dim, matching the experiment
// sampling domain. n_probes controls both the number of fixed-block probes
// and the number of complement samples per probe. Gradients with restricted
// norm below 1e-9 are skipped; a block where more than half of all
// evaluations were skipped is reported degenerate and contributes zero.
// Throws only when both blocks are degenerate, because then no part of the
// gradient field supports a verdict at all.
inline DecomposabilityReport decomposability_score(const ExprTree& expr,
                                                   std::span<const int> block_a,
                                                   std::span<const int> block_b,
                                                   int n_probes, std::uint64_t seed) {
  if (n_probes < 2) throw std::invalid_argument("n_probes must be at least 2");
  detail::validate_partition(expr.variable_count(), block_a, block_b);

  const detail::BlockTerm a =
      detail::block_term(expr, block_a, block_b, n_probes, seed, "decompose.a");
  const detail::BlockTerm b =
      detail::block_term(expr, block_b, block_a, n_probes, seed, "decompose.b");
  if (a.degenerate && b.degenerate) throw std::runtime_error("degenerate gradient field");

  DecomposabilityReport report;
  report.block_a_term = a.term;
  report.block_b_term = b.term;
  report.block_a_degenerate = a.degenerate;
  report.block_b_degenerate = b.degenerate;
  report.skipped_a = a.skipped;
  report.skipped_b = b.skipped;
  report.evals_per_block = n_probes * n_probes;
  report.score = a.term + b.term;
  return report;
}

}  // namespace structkan
