#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bowrec {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Word list plus an m x d matrix whose column j is the embedding of
// words[j]. Columns are stored as read, without normalization; the
// measurement model is a plain sum of stored columns.
// Immutable after construction and safe to share across threads.
template <class Scalar = double>
class EmbeddingDictionary {
 public:
  EmbeddingDictionary() = default;

  EmbeddingDictionary(std::vector<std::string> words, DenseMatrix<Scalar> matrix)
      : words_(std::move(words)), matrix_(std::move(matrix)) {
    if (static_cast<Eigen::Index>(words_.size()) != matrix_.cols())
      throw std::invalid_argument("dictionary word count does not match matrix columns");
    if (matrix_.rows() < 1 || matrix_.cols() < 1)
      throw std::invalid_argument("dictionary must have at least one row and one column");
    for (std::size_t j = 0; j < words_.size(); ++j) {
      if (words_[j].empty()) throw std::invalid_argument("empty token in dictionary");
      if (!index_.emplace(words_[j], static_cast<int>(j)).second)
        throw std::invalid_argument("duplicate token in dictionary: '" + words_[j] + "'");
    }
  }

  Eigen::Index embedding_dim() const { return matrix_.rows(); }  // m
  Eigen::Index size() const { return matrix_.cols(); }           // d

  const std::vector<std::string>& words() const { return words_; }
  const DenseMatrix<Scalar>& matrix() const { return matrix_; }
  const std::string& word(int j) const { return words_.at(static_cast<std::size_t>(j)); }

  // -1 when the token is not in the dictionary.
  int index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
  }

 private:
  std::vector<std::string> words_;
  DenseMatrix<Scalar> matrix_;
  std::unordered_map<std::string, int> index_;
};

template <class Scalar = double>
struct CoherenceReport {
  Scalar mu = 0;                             // in [0, 1]
  std::pair<int, int> argmax_pair{-1, -1};   // lexicographically smallest pair attaining mu
  int sparsity_guarantee = 0;                // largest integer p with p < (1 + 1/mu)/2, capped at d
  bool unbounded = false;                    // orthogonal columns: the bound is infinite
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline double parse_real(const std::string& tok, const std::string& where) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw std::runtime_error(where + ": unparseable number '" + tok + "'");
  return v;
}

}  // namespace detail

// Word-filter file: one token per line, blank lines skipped.
inline std::vector<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word list '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected one token per line");
    words.push_back(toks[0]);
  }
  return words;
}

// Reads embeddings in the usual text format: `<token> <v1> ... <vm>` per
// line, whitespace separated, one consistent m across the file. With a
// filter, the result contains exactly the filtered tokens in filter order;
// lines for other tokens are skipped without parsing their numbers.
template <class Scalar = double>
EmbeddingDictionary<Scalar> load_dictionary(
    const std::string& path, const std::optional<std::vector<std::string>>& word_filter = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings file '" + path + "'");

  std::unordered_map<std::string, std::size_t> wanted;  // token -> filter position
  if (word_filter) {
    for (std::size_t i = 0; i < word_filter->size(); ++i) {
      if (!wanted.emplace((*word_filter)[i], i).second)
        throw std::runtime_error("duplicate token in word filter: '" + (*word_filter)[i] + "'");
    }
    if (wanted.empty()) throw std::runtime_error("word filter is empty");
  }

  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;
  std::unordered_map<std::string, std::size_t> seen;
  Eigen::Index m = -1;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::string& token = toks[0];
    if (word_filter && !wanted.count(token)) continue;
    if (toks.size() < 2) throw std::runtime_error(where + ": token without embedding values");
    if (m < 0) m = static_cast<Eigen::Index>(toks.size()) - 1;
    if (static_cast<Eigen::Index>(toks.size()) - 1 != m)
      throw std::runtime_error(where + ": expected " + std::to_string(m) + " values, got " +
                               std::to_string(toks.size() - 1));
    if (!seen.emplace(token, lineno).second)
      throw std::runtime_error(where + ": duplicate token '" + token + "'");
    std::vector<double> v(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k)
      v[static_cast<std::size_t>(k)] = detail::parse_real(toks[static_cast<std::size_t>(k) + 1], where);
    words.push_back(token);
    vectors.push_back(std::move(v));
  }
  if (word_filter)
    for (const auto& tok : *word_filter)
      if (!seen.count(tok)) throw std::runtime_error(path + ": filter token '" + tok + "' not found");
  if (words.empty()) throw std::runtime_error(path + ": no embeddings loaded");

  // Reorder to filter order, or keep file order.
  std::vector<std::size_t> order(words.size());
  if (word_filter) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < words.size(); ++i) pos[words[i]] = i;
    for (std::size_t i = 0; i < word_filter->size(); ++i) order[i] = pos[(*word_filter)[i]];
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }

  DenseMatrix<Scalar> matrix(m, static_cast<Eigen::Index>(order.size()));
  std::vector<std::string> ordered;
  ordered.reserve(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    ordered.push_back(words[order[j]]);
    for (Eigen::Index k = 0; k < m; ++k)
      matrix(k, static_cast<Eigen::Index>(j)) = static_cast<Scalar>(vectors[order[j]][static_cast<std::size_t>(k)]);
  }
  return EmbeddingDictionary<Scalar>(std::move(ordered), std::move(matrix));
}

// Largest absolute normalized inner product between distinct columns,
// with the largest-p uniqueness bound it implies. Ties resolve to the
// lexicographically smallest (i, j) pair so results are reproducible.
template <class Scalar>
CoherenceReport<Scalar> mutual_coherence(const EmbeddingDictionary<Scalar>& dict) {
  const Eigen::Index d = dict.size();
  if (d < 2) throw std::domain_error("mutual coherence needs at least two columns");

  DenseVector<Scalar> norms = dict.matrix().colwise().norm();
  for (Eigen::Index j = 0; j < d; ++j)
    if (norms[j] == Scalar(0))
      throw std::domain_error("zero embedding for word '" + dict.word(static_cast<int>(j)) + "'");

  DenseMatrix<Scalar> normalized = dict.matrix();
  for (Eigen::Index j = 0; j < d; ++j) normalized.col(j) /= norms[j];
  DenseMatrix<Scalar> gram = normalized.transpose() * normalized;

  CoherenceReport<Scalar> report;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Scalar v = std::abs(gram(i, j));
      if (v > report.mu) {
        report.mu = v;
        report.argmax_pair = {static_cast<int>(i), static_cast<int>(j)};
      }
    }
  }

  if (report.mu == Scalar(0)) {
    report.unbounded = true;
    report.sparsity_guarantee = static_cast<int>(d);
  } else {
    const double bound = 0.5 * (1.0 + 1.0 / static_cast<double>(report.mu));
    long g = static_cast<long>(std::ceil(bound)) - 1;  // largest integer strictly below the bound
    g = std::max(0L, std::min(g, static_cast<long>(d)));
    report.sparsity_guarantee = static_cast<int>(g);
  }
  return report;
}

}  // namespace bowrec
