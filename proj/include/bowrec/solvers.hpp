#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bowrec/dictionary.hpp"
#include "bowrec/signal.hpp"

namespace bowrec {

template <class Scalar = double>
struct Candidate {
  BagOfWords bow;
  Scalar residual_norm_sq = 0;  // ||y - D * bow||^2
};

struct SolverConfig {
  int max_words = 4;                    // L: total word budget per action
  int beam_width = 1;                   // K
  double fista_lambda = 5.0;            // data-term weight; soft threshold is 1/(2*lambda)
  int fista_max_iter = 1000;
  double fista_tol = 1e-9;              // relative objective-change stop
  double omp_residual_threshold = 0.0;  // halting threshold on ||r||
  bool fista_nonnegative = false;       // projected soft-threshold variant

  double soft_threshold() const { return 1.0 / (2.0 * fista_lambda); }

  void validate() const {
    if (max_words < 1) throw std::invalid_argument("max_words must be >= 1");
    if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    if (!(fista_lambda > 0)) throw std::invalid_argument("fista_lambda must be > 0");
    if (fista_max_iter < 1) throw std::invalid_argument("fista_max_iter must be >= 1");
    if (!(fista_tol > 0)) throw std::invalid_argument("fista_tol must be > 0");
    if (omp_residual_threshold < 0) throw std::invalid_argument("omp_residual_threshold must be >= 0");
  }
};

namespace detail {

template <class Scalar>
void check_measurement(const EmbeddingDictionary<Scalar>& dict, const EmbeddingSum<Scalar>& y) {
  if (y.size() != dict.embedding_dim())
    throw std::domain_error("measurement length does not match embedding dimension");
}

// Beam ordering: residual first, then fewer total words, then the
// canonical (index, count) key. Total order on distinct bags.
template <class Scalar>
bool candidate_less(const BagOfWords& a, Scalar sa, const BagOfWords& b, Scalar sb) {
  if (sa != sb) return sa < sb;
  const int ta = a.total(), tb = b.total();
  if (ta != tb) return ta < tb;
  return a.counts < b.counts;
}

}  // namespace detail

// Clip negatives, round half away from zero. If the total count exceeds
// max_words, keep the max_words largest pre-rounding coefficients (ties to
// the lower index) and re-round; any count overshoot left after that is
// trimmed from the smallest kept coefficients.
template <class Scalar>
BagOfWords round_to_bow(const DenseVector<Scalar>& coefficients, int max_words) {
  if (max_words < 1) throw std::invalid_argument("max_words must be >= 1");
  const int d = static_cast<int>(coefficients.size());
  auto round_one = [](Scalar v) -> int {
    return v <= Scalar(0) ? 0 : static_cast<int>(std::llround(static_cast<double>(v)));
  };

  std::vector<int> counts(static_cast<std::size_t>(d), 0);
  long total = 0;
  for (int j = 0; j < d; ++j) {
    counts[static_cast<std::size_t>(j)] = round_one(coefficients[j]);
    total += counts[static_cast<std::size_t>(j)];
  }

  if (total > max_words) {
    std::vector<int> order(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return coefficients[a] > coefficients[b];  // stable: ties keep lower index first
    });
    std::fill(counts.begin(), counts.end(), 0);
    total = 0;
    for (int k = 0; k < max_words && k < d; ++k) {
      const int j = order[static_cast<std::size_t>(k)];
      counts[static_cast<std::size_t>(j)] = round_one(coefficients[j]);
      total += counts[static_cast<std::size_t>(j)];
    }
    // Large coefficients can still round past the budget.
    while (total > max_words) {
      int victim = -1;
      for (int k = d - 1; k >= 0; --k) {
        const int j = order[static_cast<std::size_t>(k)];
        if (counts[static_cast<std::size_t>(j)] > 0) {
          victim = j;
          break;
        }
      }
      --counts[static_cast<std::size_t>(victim)];
      --total;
    }
  }

  BagOfWords bow(d);
  for (int j = 0; j < d; ++j)
    if (counts[static_cast<std::size_t>(j)] > 0) bow.add(j, counts[static_cast<std::size_t>(j)]);
  return bow;
}

enum class BeamMode {
  all_rounds,   // track the best candidate of every round, empty included
  final_round,  // candidates from the last round only
};

// Beam search over integer count vectors. Each round extends every
// surviving candidate by every dictionary index, merges duplicate
// multisets, and keeps the beam_width best by residual norm. Candidates in
// round l carry exactly l words, so in all_rounds mode the best candidate
// seen across rounds (round 0 = empty) leads the returned list whenever it
// beats the final-round survivors. Result is sorted by ascending residual.
template <class Scalar>
std::vector<Candidate<Scalar>> ik_omp(const EmbeddingDictionary<Scalar>& dict, const EmbeddingSum<Scalar>& y,
                                      const SolverConfig& cfg, BeamMode mode = BeamMode::all_rounds) {
  cfg.validate();
  detail::check_measurement(dict, y);
  const int d = static_cast<int>(dict.size());
  const std::size_t beam_cap = static_cast<std::size_t>(cfg.beam_width);

  struct Node {
    BagOfWords bow;
    Scalar score;
  };
  auto node_less = [](const Node& a, const Node& b) {
    return detail::candidate_less(a.bow, a.score, b.bow, b.score);
  };

  std::vector<Node> beam;
  beam.push_back({BagOfWords(d), y.squaredNorm()});
  Node best = beam.front();

  // Extensions are scored as (parent, added index) pairs; bags are only
  // materialized for trim survivors. Children of one parent are distinct by
  // construction, so with a single parent no multiset merge is needed.
  struct Extension {
    Scalar score;
    int parent;
    int added;
  };
  std::vector<Extension> extensions;
  std::vector<Node> children;
  for (int round = 0; round < cfg.max_words; ++round) {
    extensions.clear();
    extensions.reserve(beam.size() * static_cast<std::size_t>(d));
    for (std::size_t p = 0; p < beam.size(); ++p) {
      const EmbeddingSum<Scalar> residual = y - synthesize(dict, beam[p].bow);
      for (int j = 0; j < d; ++j)
        extensions.push_back(
            {(residual - dict.matrix().col(j)).squaredNorm(), static_cast<int>(p), j});
    }

    auto materialize = [&](const Extension& e) {
      Node child{beam[static_cast<std::size_t>(e.parent)].bow, e.score};
      child.bow.add(e.added);
      return child;
    };

    children.clear();
    if (beam.size() == 1) {
      // Same-parent ties resolve to the smallest added index, which is also
      // the lexicographically smallest child key.
      if (extensions.size() > beam_cap) {
        std::nth_element(extensions.begin(), extensions.begin() + static_cast<std::ptrdiff_t>(beam_cap) - 1,
                         extensions.end(), [](const Extension& a, const Extension& b) {
                           return a.score != b.score ? a.score < b.score : a.added < b.added;
                         });
        extensions.resize(beam_cap);
      }
      for (const Extension& e : extensions) children.push_back(materialize(e));
    } else {
      // Different extension orders reach the same multiset; merge them so
      // the beam holds beam_width distinct candidates.
      for (const Extension& e : extensions) children.push_back(materialize(e));
      std::sort(children.begin(), children.end(),
                [](const Node& a, const Node& b) { return a.bow.counts < b.bow.counts; });
      children.erase(
          std::unique(children.begin(), children.end(),
                      [](const Node& a, const Node& b) { return a.bow.counts == b.bow.counts; }),
          children.end());
      if (children.size() > beam_cap) {
        std::nth_element(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(beam_cap) - 1,
                         children.end(), node_less);
        children.resize(beam_cap);
      }
    }
    std::sort(children.begin(), children.end(), node_less);
    std::swap(beam, children);

    if (node_less(beam.front(), best)) best = beam.front();
  }

  std::vector<Candidate<Scalar>> out;
  out.reserve(beam.size());
  for (const Node& n : beam) out.push_back({n.bow, n.score});
  if (mode == BeamMode::all_rounds && best.bow.counts != beam.front().bow.counts) {
    out.insert(out.begin(), {best.bow, best.score});
    if (out.size() > beam_cap) out.pop_back();
  }
  return out;
}

// Classical OMP: repeatedly pick the column with the largest normalized
// correlation to the residual (columns are stored unnormalized, so the
// correlation divides by the column norm), refit by least squares on the
// support, and stop at the residual threshold or after max_words picks.
// The real coefficients are then rounded to integer counts and the
// residual is recomputed against the rounded vector.
template <class Scalar>
Candidate<Scalar> omp(const EmbeddingDictionary<Scalar>& dict, const EmbeddingSum<Scalar>& y,
                      const SolverConfig& cfg) {
  cfg.validate();
  detail::check_measurement(dict, y);
  const Eigen::Index d = dict.size();
  const Eigen::Index m = dict.embedding_dim();

  DenseVector<Scalar> col_norms = dict.matrix().colwise().norm();
  std::vector<Eigen::Index> support;
  std::vector<bool> in_support(static_cast<std::size_t>(d), false);
  EmbeddingSum<Scalar> residual = y;
  DenseVector<Scalar> support_coeffs;

  while (static_cast<int>(support.size()) < cfg.max_words) {
    if (residual.norm() <= static_cast<Scalar>(cfg.omp_residual_threshold)) break;

    Eigen::Index pick = -1;
    Scalar best_corr = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (in_support[static_cast<std::size_t>(j)] || col_norms[j] == Scalar(0)) continue;
      const Scalar corr = std::abs(dict.matrix().col(j).dot(residual)) / col_norms[j];
      if (corr > best_corr) {
        best_corr = corr;
        pick = j;
      }
    }
    if (pick < 0) break;  // residual orthogonal to every remaining column

    support.push_back(pick);
    in_support[static_cast<std::size_t>(pick)] = true;

    DenseMatrix<Scalar> sub(m, static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = dict.matrix().col(support[k]);
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix<Scalar>> cod(sub);
    cod.setThreshold(Scalar(1e-10));  // rank-deficient supports fall back to the minimum-norm solution
    support_coeffs = cod.solve(y);
    residual = y - sub * support_coeffs;
  }

  DenseVector<Scalar> coefficients = DenseVector<Scalar>::Zero(d);
  for (std::size_t k = 0; k < support.size(); ++k) coefficients[support[k]] = support_coeffs[static_cast<Eigen::Index>(k)];

  Candidate<Scalar> result;
  result.bow = round_to_bow(coefficients, cfg.max_words);
  result.residual_norm_sq = (y - synthesize(dict, result.bow)).squaredNorm();
  return result;
}

// Largest eigenvalue of D^T D (squared spectral norm) by power iteration.
template <class Scalar>
Scalar spectral_norm_sq(const DenseMatrix<Scalar>& mat, int max_iter = 200, Scalar tol = Scalar(1e-13)) {
  if (mat.size() == 0) return 0;
  DenseVector<Scalar> v = DenseVector<Scalar>::Ones(mat.cols());
  v /= v.norm();
  Scalar lambda = 0;
  for (int it = 0; it < max_iter; ++it) {
    DenseVector<Scalar> w = mat.transpose() * (mat * v);
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) return 0;
    const Scalar next = v.dot(w);
    v = w / wn;
    if (std::abs(next - lambda) <= tol * std::max(Scalar(1), std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

template <class Scalar = double>
struct FistaResult {
  Candidate<Scalar> candidate;
  DenseVector<Scalar> coefficients;  // real-valued minimizer estimate, before rounding
  Scalar objective = 0;              // (1/2)||y - Dx||^2 + tau*||x||_1 at `coefficients`
  int iterations = 0;
  bool converged = false;
};

// FISTA on F(x) = (1/2)||y - Dx||^2 + tau*||x||_1 with tau =
// cfg.soft_threshold(). Gradient step 1/||D||_2^2, soft-thresholding,
// Nesterov momentum. Returns the best iterate seen (x = 0 included, so the
// objective never exceeds F(0)); the rounded integer candidate is scored
// against the rounded vector.
template <class Scalar>
FistaResult<Scalar> fista_bpdn(const EmbeddingDictionary<Scalar>& dict, const EmbeddingSum<Scalar>& y,
                               const SolverConfig& cfg) {
  cfg.validate();
  detail::check_measurement(dict, y);
  const DenseMatrix<Scalar>& D = dict.matrix();
  const Eigen::Index d = dict.size();
  const Scalar tau = static_cast<Scalar>(cfg.soft_threshold());

  auto objective = [&](const DenseVector<Scalar>& x) {
    return Scalar(0.5) * (y - D * x).squaredNorm() + tau * x.template lpNorm<1>();
  };

  FistaResult<Scalar> result;
  DenseVector<Scalar> x = DenseVector<Scalar>::Zero(d);
  result.coefficients = x;
  result.objective = objective(x);

  const Scalar lip = spectral_norm_sq(D) * Scalar(1 + 1e-6);
  if (lip > Scalar(0)) {
    const Scalar step = Scalar(1) / lip;
    const Scalar shrink = tau * step;
    DenseVector<Scalar> z = x;
    DenseVector<Scalar> x_prev = x;
    Scalar t = 1;
    Scalar f_prev = result.objective;

    for (int it = 1; it <= cfg.fista_max_iter; ++it) {
      const DenseVector<Scalar> grad = D.transpose() * (D * z - y);
      const DenseVector<Scalar> w = z - step * grad;
      if (cfg.fista_nonnegative)
        x = (w.array() - shrink).max(Scalar(0)).matrix();
      else
        x = (w.array().sign() * (w.array().abs() - shrink).max(Scalar(0))).matrix();

      const Scalar f = objective(x);
      if (f < result.objective) {
        result.objective = f;
        result.coefficients = x;
      }
      result.iterations = it;

      if (std::abs(f - f_prev) <= static_cast<Scalar>(cfg.fista_tol) * std::max(Scalar(1), std::abs(f_prev))) {
        result.converged = true;
        break;
      }
      f_prev = f;

      const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
      z = x + ((t - Scalar(1)) / t_next) * (x - x_prev);
      x_prev = x;
      t = t_next;
    }
  } else {
    result.converged = true;  // zero dictionary: x = 0 is optimal
  }

  result.candidate.bow = round_to_bow(result.coefficients, cfg.max_words);
  result.candidate.residual_norm_sq = (y - synthesize(dict, result.candidate.bow)).squaredNorm();
  return result;
}

// Number of count vectors with total <= max_words over d indices,
// i.e. C(d + L, L); saturates instead of overflowing.
inline unsigned long long brute_force_candidate_count(Eigen::Index d, int max_words) {
  const unsigned long long cap = 1ULL << 62;
  unsigned long long n = 1;
  for (int i = 1; i <= max_words; ++i) {
    n = n * (static_cast<unsigned long long>(d) + static_cast<unsigned long long>(i));
    n /= static_cast<unsigned long long>(i);
    if (n > cap) return cap;
  }
  return n;
}

// Exhaustive minimizer of ||y - Dx||^2 over every count vector with total
// <= max_words. Test oracle for small instances; refuses anything past
// 10^6 candidates. Ties go to fewer words, then to the lexicographically
// smaller expanded index sequence (DFS visiting order).
template <class Scalar>
Candidate<Scalar> brute_force(const EmbeddingDictionary<Scalar>& dict, const EmbeddingSum<Scalar>& y,
                              const SolverConfig& cfg) {
  cfg.validate();
  detail::check_measurement(dict, y);
  const int d = static_cast<int>(dict.size());

  const unsigned long long count = brute_force_candidate_count(dict.size(), cfg.max_words);
  if (count > 1000000ULL)
    throw std::runtime_error("brute_force refused: " + std::to_string(count) + " candidate count exceeds 1000000");

  Candidate<Scalar> best;
  best.bow = BagOfWords(d);
  best.residual_norm_sq = y.squaredNorm();
  int best_total = 0;

  BagOfWords current(d);
  EmbeddingSum<Scalar> residual = y;

  auto consider = [&](int total) {
    const Scalar score = residual.squaredNorm();
    if (score < best.residual_norm_sq ||
        (score == best.residual_norm_sq && total < best_total)) {
      best.bow = current;
      best.residual_norm_sq = score;
      best_total = total;
    }
  };

  // DFS over nondecreasing index sequences; each node is one multiset.
  auto recurse = [&](auto&& self, int start, int remaining, int total) -> void {
    if (remaining == 0) return;
    for (int j = start; j < d; ++j) {
      current.add(j);
      residual -= dict.matrix().col(j);
      consider(total + 1);
      self(self, j, remaining - 1, total + 1);
      residual += dict.matrix().col(j);
      auto& back = current.counts.back();
      if (back.first == j && back.second > 1)
        --back.second;
      else
        current.counts.pop_back();
    }
  };
  recurse(recurse, 0, cfg.max_words, 0);
  return best;
}

}  // namespace bowrec
