#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bowrec/dictionary.hpp"
#include "bowrec/language.hpp"
#include "bowrec/random.hpp"
#include "bowrec/signal.hpp"
#include "bowrec/solvers.hpp"

namespace bowrec {

struct QuestStep {
  std::string observation;
  std::string gold_sentence;
  double reward = 0;
};

// Ordered walkthrough of (observation, gold action, reward) steps. The
// environment semantics are scripted: an action is right when its bag of
// words matches the gold action's, and the first wrong step forfeits all
// later reward.
struct QuestTrace {
  std::string name;
  std::vector<QuestStep> steps;
};

// JSON Lines: a `{"name": ...}` header line, then one
// `{"obs": ..., "action": ..., "reward": ...}` object per step.
inline QuestTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  QuestTrace trace;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    if (!have_header) {
      if (!obj.contains("name") || !obj["name"].is_string())
        throw std::runtime_error(where + ": trace must open with a {\"name\": ...} line");
      trace.name = obj["name"].get<std::string>();
      have_header = true;
      continue;
    }
    QuestStep step;
    if (!obj.contains("action") || !obj["action"].is_string())
      throw std::runtime_error(where + ": step needs a string \"action\"");
    step.gold_sentence = obj["action"].get<std::string>();
    if (obj.contains("obs")) step.observation = obj["obs"].get<std::string>();
    if (obj.contains("reward")) {
      if (!obj["reward"].is_number()) throw std::runtime_error(where + ": \"reward\" must be a number");
      step.reward = obj["reward"].get<double>();
    }
    if (!std::isfinite(step.reward)) throw std::runtime_error(where + ": reward must be finite");
    trace.steps.push_back(std::move(step));
  }
  if (!have_header) throw std::runtime_error(path + ": missing header line");
  if (trace.steps.empty()) throw std::runtime_error(path + ": trace has no steps");
  return trace;
}

struct NoiseSpec {
  double snr = std::numeric_limits<double>::infinity();
  double wrong_action_prob = 0;  // p: substitute a random non-gold trace action
  double synonym_prob = 0;       // q: re-express the gold action with synonyms
  std::uint64_t seed = 0;
  bool per_step_noise = true;  // false: one Gaussian draw per episode, rescaled per step

  void validate() const {
    if (!(snr > 0)) throw std::invalid_argument("snr must be positive");
    if (wrong_action_prob < 0 || wrong_action_prob > 1)
      throw std::invalid_argument("wrong_action_prob must be in [0, 1]");
    if (synonym_prob < 0 || synonym_prob > 1)
      throw std::invalid_argument("synonym_prob must be in [0, 1]");
  }
};

// token -> interchangeable tokens; sorted keys keep iteration deterministic.
using SynonymTable = std::map<std::string, std::vector<std::string>>;

inline SynonymTable load_synonyms(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synonym file '" + path + "'");
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!obj.is_object()) throw std::runtime_error(path + ": expected a JSON object");
  SynonymTable table;
  for (const auto& [token, value] : obj.items()) {
    if (!value.is_array() || value.empty())
      throw std::runtime_error(path + ": synonyms for '" + token + "' must be a nonempty array");
    std::vector<std::string> alternatives;
    for (const auto& alt : value) alternatives.push_back(alt.get<std::string>());
    table[token] = std::move(alternatives);
  }
  return table;
}

template <class Scalar>
void validate_synonyms(const SynonymTable& table, const EmbeddingDictionary<Scalar>& dict) {
  for (const auto& [token, alternatives] : table) {
    if (dict.index_of(token) < 0)
      throw std::invalid_argument("synonym key '" + token + "' not in dictionary");
    for (const auto& alt : alternatives)
      if (dict.index_of(alt) < 0)
        throw std::invalid_argument("synonym '" + alt + "' for '" + token + "' not in dictionary");
  }
}

// Stands in for a trained encoder: per step, demonstrate a wrong action
// with probability p (uniform over the trace's other actions), otherwise
// re-express the action with synonyms with probability q, then emit the
// sum of embeddings with Gaussian noise at the given snr. Draws come from
// a per-step stream seeded by (seed, step, repeat), so noise realizations
// are paired across solvers and never depend on evaluation order.
template <class Scalar>
std::vector<EmbeddingSum<Scalar>> simulate_encoder(const QuestTrace& trace,
                                                   const EmbeddingDictionary<Scalar>& dict,
                                                   const NoiseSpec& noise, const SynonymTable& synonyms,
                                                   std::uint64_t repeat = 0) {
  noise.validate();
  validate_synonyms(synonyms, dict);

  std::vector<BagOfWords> gold;
  gold.reserve(trace.steps.size());
  for (const auto& step : trace.steps) gold.push_back(sentence_to_bow(step.gold_sentence, dict));

  // Distinct actions seen in the trace, in first-appearance order.
  std::vector<BagOfWords> pool;
  for (const auto& bow : gold)
    if (std::find(pool.begin(), pool.end(), bow) == pool.end()) pool.push_back(bow);

  std::vector<EmbeddingSum<Scalar>> measurements;
  measurements.reserve(trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    RandomStream stream(mix_seed(noise.seed, i, repeat));
    BagOfWords demonstrated = gold[i];

    if (stream.uniform01() <= noise.wrong_action_prob) {
      std::vector<const BagOfWords*> others;
      for (const auto& bow : pool)
        if (!(bow == gold[i])) others.push_back(&bow);
      if (!others.empty()) demonstrated = *others[stream.index(others.size())];
    } else if (stream.uniform01() <= noise.synonym_prob) {
      BagOfWords replaced(static_cast<int>(dict.size()));
      for (const auto& token : tokenize_sentence(trace.steps[i].gold_sentence)) {
        auto it = synonyms.find(token);
        const std::string& use = (it == synonyms.end()) ? token : it->second[stream.index(it->second.size())];
        replaced.add(dict.index_of(use));
      }
      demonstrated = replaced;
    }

    EmbeddingSum<Scalar> y = synthesize(dict, demonstrated);
    const std::uint64_t noise_seed =
        noise.per_step_noise ? stream.next_u64() : mix_seed(noise.seed, 0xE415EDEULL, repeat);
    if (!std::isinf(noise.snr)) y = add_noise(y, static_cast<Scalar>(noise.snr), noise_seed);
    measurements.push_back(std::move(y));
  }
  return measurements;
}

// Reward over the maximal prefix of correct steps; the first mistake ends
// the episode.
inline double prefix_reward(const std::vector<double>& rewards, const std::vector<bool>& correct) {
  if (rewards.size() != correct.size()) throw std::invalid_argument("prefix_reward: size mismatch");
  double total = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!correct[i]) break;
    total += rewards[i];
  }
  return total;
}

inline const std::vector<std::string>& solver_ids() {
  static const std::vector<std::string> ids = {"omp", "iomp", "ikomp", "ikomp-paper", "fista", "oracle"};
  return ids;
}

// Runs the named solver and returns its best candidate (beam solvers rank
// by reconstruction score; the front of the list wins).
template <class Scalar>
Candidate<Scalar> run_solver(const std::string& solver_id, const EmbeddingDictionary<Scalar>& dict,
                             const EmbeddingSum<Scalar>& y, const SolverConfig& cfg) {
  if (solver_id == "omp") return omp(dict, y, cfg);
  if (solver_id == "iomp") {
    SolverConfig one = cfg;
    one.beam_width = 1;
    return ik_omp(dict, y, one).front();
  }
  if (solver_id == "ikomp") return ik_omp(dict, y, cfg).front();
  if (solver_id == "ikomp-paper") return ik_omp(dict, y, cfg, BeamMode::final_round).front();
  if (solver_id == "fista") return fista_bpdn(dict, y, cfg).candidate;
  if (solver_id == "oracle") return brute_force(dict, y, cfg);
  throw std::invalid_argument("unknown solver '" + solver_id + "'");
}

struct StepResult {
  int index = 0;
  BagOfWords recovered;
  bool correct = false;
  double residual_norm_sq = 0;
  double wall_ms = 0;  // solver call only; encoder simulation excluded
};

struct EvaluationReport {
  std::string trace_name;
  std::string solver_id;
  SolverConfig config;
  NoiseSpec noise;
  double accuracy = 0;      // fraction of steps recovered exactly
  double reward = 0;        // sum over the maximal correct prefix
  double total_reward = 0;  // what a perfect run would collect
  std::vector<StepResult> per_step;

  double mean_step_ms() const {
    if (per_step.empty()) return 0;
    double s = 0;
    for (const auto& r : per_step) s += r.wall_ms;
    return s / static_cast<double>(per_step.size());
  }
};

// Replays a trace through a solver under the given noise model. Recovery is
// judged against the gold action even when the demonstration was corrupted:
// the metric is recovering the right behavior, not the corrupted signal.
template <class Scalar>
EvaluationReport evaluate(const QuestTrace& trace, const EmbeddingDictionary<Scalar>& dict,
                          const std::string& solver_id, const SolverConfig& cfg, const NoiseSpec& noise,
                          const SynonymTable& synonyms = {}, std::uint64_t repeat = 0) {
  cfg.validate();
  if (std::find(solver_ids().begin(), solver_ids().end(), solver_id) == solver_ids().end())
    throw std::invalid_argument("unknown solver '" + solver_id + "'");

  const auto measurements = simulate_encoder(trace, dict, noise, synonyms, repeat);

  EvaluationReport report;
  report.trace_name = trace.name;
  report.solver_id = solver_id;
  report.config = cfg;
  report.noise = noise;

  std::vector<double> rewards;
  std::vector<bool> correct;
  int n_correct = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const BagOfWords gold = sentence_to_bow(trace.steps[i].gold_sentence, dict);

    const auto t0 = std::chrono::steady_clock::now();
    const Candidate<Scalar> candidate = run_solver(solver_id, dict, measurements[i], cfg);
    const auto t1 = std::chrono::steady_clock::now();

    StepResult sr;
    sr.index = static_cast<int>(i);
    sr.recovered = candidate.bow;
    sr.correct = bow_equal(candidate.bow, gold);
    sr.residual_norm_sq = static_cast<double>(candidate.residual_norm_sq);
    sr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    n_correct += sr.correct ? 1 : 0;
    rewards.push_back(trace.steps[i].reward);
    correct.push_back(sr.correct);
    report.total_reward += trace.steps[i].reward;
    report.per_step.push_back(std::move(sr));
  }
  report.accuracy = static_cast<double>(n_correct) / static_cast<double>(trace.steps.size());
  report.reward = prefix_reward(rewards, correct);
  return report;
}

// One sweep cell result. repeat == -1 marks the per-cell aggregate row.
struct SweepRow {
  std::string trace;
  std::string solver;
  int K = 0;
  int L = 0;
  double snr = 0;
  double wrong_p = 0;
  double synonym_p = 0;
  std::uint64_t seed = 0;
  int repeat = 0;
  double accuracy = 0;
  double reward = 0;
  double mean_step_ms = 0;
};

// Cross product of solvers x noise grid x repeats, one row per repeat plus
// one aggregate row per cell. Row order is the deterministic loop order;
// noise streams depend only on (seed, step, repeat), never on the solver.
template <class Scalar>
std::vector<SweepRow> sweep(const QuestTrace& trace, const EmbeddingDictionary<Scalar>& dict,
                            const std::vector<std::string>& solvers, const SolverConfig& cfg,
                            const std::vector<NoiseSpec>& noise_grid, int repeats,
                            const SynonymTable& synonyms = {}) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  std::vector<SweepRow> rows;
  for (const auto& solver : solvers) {
    for (const auto& noise : noise_grid) {
      SweepRow agg;
      agg.trace = trace.name;
      agg.solver = solver;
      agg.K = cfg.beam_width;
      agg.L = cfg.max_words;
      agg.snr = noise.snr;
      agg.wrong_p = noise.wrong_action_prob;
      agg.synonym_p = noise.synonym_prob;
      agg.seed = noise.seed;
      agg.repeat = -1;
      for (int rep = 0; rep < repeats; ++rep) {
        const auto report = evaluate(trace, dict, solver, cfg, noise, synonyms,
                                     static_cast<std::uint64_t>(rep));
        SweepRow row = agg;
        row.repeat = rep;
        row.accuracy = report.accuracy;
        row.reward = report.reward;
        row.mean_step_ms = report.mean_step_ms();
        agg.accuracy += row.accuracy / repeats;
        agg.reward += row.reward / repeats;
        agg.mean_step_ms += row.mean_step_ms / repeats;
        rows.push_back(std::move(row));
      }
      rows.push_back(std::move(agg));
    }
  }
  return rows;
}

namespace detail {

inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "trace,solver,K,L,snr,wrong_p,synonym_p,seed,repeat,accuracy,reward,mean_step_ms\n";
  for (const auto& r : rows) {
    out << r.trace << ',' << r.solver << ',' << r.K << ',' << r.L << ',' << detail::format_real(r.snr)
        << ',' << detail::format_real(r.wrong_p) << ',' << detail::format_real(r.synonym_p) << ','
        << r.seed << ',';
    if (r.repeat < 0)
      out << "mean";
    else
      out << r.repeat;
    char ms[32];
    std::snprintf(ms, sizeof(ms), "%.6f", r.mean_step_ms);
    out << ',' << detail::format_real(r.accuracy) << ',' << detail::format_real(r.reward) << ',' << ms
        << '\n';
  }
}

struct BenchRow {
  std::string solver;
  int K = 0;
  int samples = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
};

// Times each solver variant over the same set of random noiseless
// measurements synthesized from random bags of at most max_words words.
template <class Scalar>
std::vector<BenchRow> bench_runtime(const EmbeddingDictionary<Scalar>& dict,
                                    const std::vector<std::pair<std::string, SolverConfig>>& variants,
                                    int samples, std::uint64_t seed) {
  if (samples < 10) throw std::invalid_argument("bench needs at least 10 samples");
  if (variants.empty()) throw std::invalid_argument("bench needs at least one solver variant");

  const int max_words = variants.front().second.max_words;
  std::vector<EmbeddingSum<Scalar>> measurements;
  measurements.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    RandomStream stream(mix_seed(seed, static_cast<std::uint64_t>(s)));
    BagOfWords bow(static_cast<int>(dict.size()));
    const int words = 1 + static_cast<int>(stream.index(static_cast<std::size_t>(max_words)));
    for (int w = 0; w < words; ++w) bow.add(static_cast<int>(stream.index(dict.size())));
    measurements.push_back(synthesize(dict, bow));
  }

  std::vector<BenchRow> rows;
  for (const auto& [solver_id, cfg] : variants) {
    cfg.validate();
    std::vector<double> times_ms;
    times_ms.reserve(measurements.size());
    for (const auto& y : measurements) {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = static_cast<double>(run_solver(solver_id, dict, y, cfg).residual_norm_sq);
      (void)sink;
      const auto t1 = std::chrono::steady_clock::now();
      times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    BenchRow row;
    row.solver = solver_id;
    row.K = cfg.beam_width;
    row.samples = samples;
    for (double t : times_ms) row.mean_ms += t / static_cast<double>(times_ms.size());
    std::vector<double> sorted = times_ms;
    std::sort(sorted.begin(), sorted.end());
    row.median_ms = sorted[sorted.size() / 2];
    row.p95_ms = sorted[std::min(sorted.size() - 1, static_cast<std::size_t>(0.95 * sorted.size()))];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "solver,K,samples,mean_ms,median_ms,p95_ms\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.mean_ms, r.median_ms, r.p95_ms);
    out << r.solver << ',' << r.K << ',' << r.samples << ',' << buf << '\n';
  }
}

}  // namespace bowrec
