#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bowrec/dictionary.hpp"
#include "bowrec/random.hpp"

namespace bowrec {

// The measurement lives in embedding space: a dense length-m vector.
template <class Scalar>
using EmbeddingSum = DenseVector<Scalar>;

// Sparse nonnegative-integer word-count vector. Entries are kept as
// (index, count) pairs sorted by index with count >= 1, which doubles as
// the canonical key used by solver tie-breaking and deduplication.
struct BagOfWords {
  std::vector<std::pair<int, int>> counts;
  int dict_size = 0;

  BagOfWords() = default;
  explicit BagOfWords(int d) : dict_size(d) {}

  bool empty() const { return counts.empty(); }

  int total() const {
    int t = 0;
    for (const auto& [idx, c] : counts) t += c;
    return t;
  }

  int count_at(int index) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), index,
                               [](const auto& p, int v) { return p.first < v; });
    return (it != counts.end() && it->first == index) ? it->second : 0;
  }

  void add(int index, int k = 1) {
    if (index < 0 || index >= dict_size) throw std::domain_error("word index out of range");
    if (k <= 0) throw std::domain_error("count increments must be positive");
    auto it = std::lower_bound(counts.begin(), counts.end(), index,
                               [](const auto& p, int v) { return p.first < v; });
    if (it != counts.end() && it->first == index)
      it->second += k;
    else
      counts.insert(it, {index, k});
  }

  friend bool operator==(const BagOfWords&, const BagOfWords&) = default;
};

// Exact-match test; order-insensitive by construction.
inline bool bow_equal(const BagOfWords& a, const BagOfWords& b) {
  if (a.dict_size != b.dict_size) throw std::domain_error("bow_equal: mismatched dictionary sizes");
  return a.counts == b.counts;
}

// y = sum_j counts[j] * column_j(D).
template <class Scalar>
EmbeddingSum<Scalar> synthesize(const EmbeddingDictionary<Scalar>& dict, const BagOfWords& bow) {
  EmbeddingSum<Scalar> y = EmbeddingSum<Scalar>::Zero(dict.embedding_dim());
  for (const auto& [idx, c] : bow.counts) {
    if (idx < 0 || idx >= static_cast<int>(dict.size()))
      throw std::domain_error("bag-of-words index out of range for dictionary");
    y += static_cast<Scalar>(c) * dict.matrix().col(idx);
  }
  return y;
}

// Adds i.i.d. Gaussian noise rescaled so that ||signal|| / ||noise|| equals
// snr exactly for this draw. snr = infinity returns the signal unchanged.
// Same seed, same output, bit for bit.
template <class Scalar>
EmbeddingSum<Scalar> add_noise(const EmbeddingSum<Scalar>& signal, Scalar snr, std::uint64_t seed) {
  if (!(snr > Scalar(0))) throw std::domain_error("snr must be positive");
  if (std::isinf(static_cast<double>(snr))) return signal;

  const Scalar signal_norm = signal.norm();
  if (signal_norm == Scalar(0))
    throw std::domain_error("noise scale undefined for a zero-norm signal at finite snr");

  RandomStream rng(seed);
  EmbeddingSum<Scalar> eps(signal.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = static_cast<Scalar>(rng.normal());
  const Scalar eps_norm = eps.norm();
  if (eps_norm == Scalar(0)) throw std::runtime_error("degenerate noise draw");
  return signal + (signal_norm / (snr * eps_norm)) * eps;
}

}  // namespace bowrec
