#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bowrec/quest.hpp"

using namespace bowrec;

namespace {

const std::string kData = BOWREC_DATA_DIR;
constexpr double kInf = std::numeric_limits<double>::infinity();

const EmbeddingDictionary<double>& game_dict() {
  static const EmbeddingDictionary<double> dict =
      load_dictionary<double>(kData + "/glove50_game.txt", load_word_list(kData + "/words_game.txt"));
  return dict;
}

EmbeddingDictionary<double> identity_dict(int n) {
  std::vector<std::string> words;
  for (int j = 0; j < n; ++j) words.push_back("w" + std::to_string(j));
  return EmbeddingDictionary<double>(std::move(words), DenseMatrix<double>::Identity(n, n));
}

// Strips the trailing (timing) column from every CSV line.
std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    out += line.substr(0, line.rfind(','));
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("fixture dictionary matches the expected geometry") {
  const auto& dict = game_dict();
  CHECK(dict.size() == 112);
  CHECK(dict.embedding_dim() == 50);
  const auto report = mutual_coherence(dict);
  CHECK(report.mu >= 0.9);
  CHECK(report.mu <= 1.0);
  CHECK(report.sparsity_guarantee == 1);
}

TEST_CASE("fixture traces load and tokenize against the dictionary") {
  const auto troll = load_trace(kData + "/troll_quest.jsonl");
  CHECK(troll.name == "troll-quest");
  CHECK(troll.steps.size() == 12);

  const auto zork = load_trace(kData + "/open_zork.jsonl");
  CHECK(zork.name == "open-zork");
  CHECK(zork.steps.size() >= 50);

  const auto lexicon = load_lexicon(kData + "/lexicon_game.txt", &game_dict());
  const auto synonyms = load_synonyms(kData + "/synonyms_game.json");
  validate_synonyms(synonyms, game_dict());

  for (const auto* trace : {&troll, &zork}) {
    for (const auto& step : trace->steps) {
      const auto bow = sentence_to_bow(step.gold_sentence, game_dict());
      CHECK(bow.total() >= 1);
      CHECK(bow.total() <= 4);
      // every gold action has a lexicon-covered, bag-preserving rendering
      const auto ordered = order_words(bow, game_dict(), lexicon);
      CHECK(sentence_to_bow(ordered, game_dict()) == bow);
    }
  }
}

TEST_CASE("trace loading rejects malformed files") {
  const auto path = std::filesystem::temp_directory_path() / "bowrec_trace.jsonl";
  {
    std::ofstream out(path);
    out << "{\"obs\": \"x\", \"action\": \"go\", \"reward\": 0}\n";
  }
  CHECK_THROWS_AS(load_trace(path.string()), std::runtime_error);  // no header

  {
    std::ofstream out(path);
    out << "{\"name\": \"t\"}\n";
  }
  CHECK_THROWS_AS(load_trace(path.string()), std::runtime_error);  // no steps

  {
    std::ofstream out(path);
    out << "{\"name\": \"t\"}\n{\"action\": \"go\", \"reward\": \"lots\"}\n";
  }
  CHECK_THROWS_AS(load_trace(path.string()), std::runtime_error);  // bad reward
}

TEST_CASE("simulate_encoder without noise reproduces the gold sums") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  const auto measurements = simulate_encoder(trace, game_dict(), NoiseSpec{}, {});
  REQUIRE(measurements.size() == trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto gold = synthesize(game_dict(), sentence_to_bow(trace.steps[i].gold_sentence, game_dict()));
    CHECK(measurements[i] == gold);
  }
}

TEST_CASE("simulate_encoder with certain wrong-action noise never emits gold") {
  const auto trace = load_trace(kData + "/open_zork.jsonl");
  NoiseSpec noise;
  noise.wrong_action_prob = 1.0;
  noise.seed = 3;
  const auto measurements = simulate_encoder(trace, game_dict(), noise, {});
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto gold = synthesize(game_dict(), sentence_to_bow(trace.steps[i].gold_sentence, game_dict()));
    CHECK(measurements[i] != gold);
  }
}

TEST_CASE("simulate_encoder synonym noise swaps tokens within the table") {
  const auto path = std::filesystem::temp_directory_path() / "bowrec_syn_trace.jsonl";
  {
    std::ofstream out(path);
    out << "{\"name\": \"syn\"}\n{\"obs\": \"\", \"action\": \"drop egg\", \"reward\": 0}\n";
  }
  const auto trace = load_trace(path.string());
  const auto synonyms = load_synonyms(kData + "/synonyms_game.json");

  NoiseSpec noise;
  noise.synonym_prob = 1.0;
  const auto throw_egg = synthesize(game_dict(), sentence_to_bow("throw egg", game_dict()));
  const auto discard_egg = synthesize(game_dict(), sentence_to_bow("discard egg", game_dict()));
  bool saw_throw = false, saw_discard = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    noise.seed = seed;
    const auto measurements = simulate_encoder(trace, game_dict(), noise, synonyms);
    const bool is_throw = measurements[0] == throw_egg;
    const bool is_discard = measurements[0] == discard_egg;
    CHECK((is_throw || is_discard));
    saw_throw = saw_throw || is_throw;
    saw_discard = saw_discard || is_discard;
  }
  CHECK(saw_throw);
  CHECK(saw_discard);

  SynonymTable bad;
  bad["drop"] = {"notaword"};
  CHECK_THROWS_AS(simulate_encoder(trace, game_dict(), noise, bad), std::invalid_argument);
}

TEST_CASE("episode-level noise reuses one Gaussian draw across steps") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  NoiseSpec noise;
  noise.snr = 2.0;
  noise.seed = 4;
  noise.per_step_noise = false;
  const auto measurements = simulate_encoder(trace, game_dict(), noise, {});
  EmbeddingSum<double> reference;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto gold = synthesize(game_dict(), sentence_to_bow(trace.steps[i].gold_sentence, game_dict()));
    EmbeddingSum<double> direction = measurements[i] - gold;
    direction /= direction.norm();
    if (i == 0)
      reference = direction;
    else
      CHECK((direction - reference).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  noise.per_step_noise = true;
  const auto per_step = simulate_encoder(trace, game_dict(), noise, {});
  EmbeddingSum<double> d0 = per_step[0] - synthesize(game_dict(), sentence_to_bow(trace.steps[0].gold_sentence, game_dict()));
  EmbeddingSum<double> d1 = per_step[1] - synthesize(game_dict(), sentence_to_bow(trace.steps[1].gold_sentence, game_dict()));
  CHECK((d0 / d0.norm() - d1 / d1.norm()).lpNorm<Eigen::Infinity>() > 1e-6);
}

TEST_CASE("simulate_encoder is deterministic per (seed, repeat)") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  NoiseSpec noise;
  noise.snr = 2.0;
  noise.seed = 11;
  const auto a = simulate_encoder(trace, game_dict(), noise, {});
  const auto b = simulate_encoder(trace, game_dict(), noise, {});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  const auto c = simulate_encoder(trace, game_dict(), noise, {}, 1);
  CHECK(a[0] != c[0]);
}

TEST_CASE("noiseless beam recovery is exact on the troll quest") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  SolverConfig cfg;
  cfg.beam_width = 112;
  const auto report = evaluate(trace, game_dict(), "ikomp", cfg, NoiseSpec{});
  CHECK(report.accuracy == 1.0);
  CHECK(report.reward == report.total_reward);
  CHECK(report.total_reward == 40.0);
}

TEST_CASE("plain omp is not exact on the long walkthrough even without noise") {
  const auto trace = load_trace(kData + "/open_zork.jsonl");
  SolverConfig cfg;
  const auto report = evaluate(trace, game_dict(), "omp", cfg, NoiseSpec{});
  CHECK(report.accuracy < 1.0);
}

TEST_CASE("prefix reward stops at the first mistake") {
  CHECK(prefix_reward({5, 1, 1}, {true, true, true}) == 7.0);
  CHECK(prefix_reward({5, 1, 1}, {false, true, true}) == 0.0);
  CHECK(prefix_reward({5, 1, 1}, {true, false, true}) == 5.0);
  CHECK(prefix_reward({}, {}) == 0.0);
  CHECK_THROWS_AS(prefix_reward({1.0}, {}), std::invalid_argument);

  // against an independent accumulation over random masks
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 20;
    std::vector<double> rewards(n);
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      rewards[i] = static_cast<double>(gen() % 10);
      mask[i] = (gen() % 2) == 0;
    }
    double expected = 0;
    bool alive = true;
    for (std::size_t i = 0; i < n; ++i) {
      alive = alive && mask[i];
      if (alive) expected += rewards[i];
    }
    CHECK(prefix_reward(rewards, mask) == expected);

    // with equal step rewards, accuracy dominates the reward fraction
    const std::vector<double> flat(n, 3.0);
    double accuracy = 0;
    for (std::size_t i = 0; i < n; ++i) accuracy += mask[i] ? 1.0 / n : 0.0;
    CHECK(accuracy + 1e-12 >= prefix_reward(flat, mask) / (3.0 * n));
  }
}

TEST_CASE("evaluate applies the prefix-reward rule to solver mistakes") {
  // Step 1's two-word action cannot be represented with a one-word budget,
  // so it must be recovered incorrectly while the rest are exact.
  const auto path = std::filesystem::temp_directory_path() / "bowrec_eval_trace.jsonl";
  {
    std::ofstream out(path);
    out << "{\"name\": \"tiny\"}\n"
        << "{\"obs\": \"\", \"action\": \"w0 w1\", \"reward\": 5}\n"
        << "{\"obs\": \"\", \"action\": \"w1\", \"reward\": 1}\n"
        << "{\"obs\": \"\", \"action\": \"w2\", \"reward\": 1}\n";
  }
  const auto trace = load_trace(path.string());
  const auto dict = identity_dict(3);
  SolverConfig cfg;
  cfg.max_words = 1;
  const auto report = evaluate(trace, dict, "oracle", cfg, NoiseSpec{});
  CHECK(report.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(report.reward == 0.0);
  CHECK(report.total_reward == 7.0);
  CHECK_FALSE(report.per_step[0].correct);
  CHECK(report.per_step[1].correct);
  CHECK(report.per_step[2].correct);

  CHECK_THROWS_AS(evaluate(trace, dict, "nosuch", cfg, NoiseSpec{}), std::invalid_argument);
}

TEST_CASE("evaluate judges against the gold action under demonstration noise") {
  const auto path = std::filesystem::temp_directory_path() / "bowrec_gold_trace.jsonl";
  {
    std::ofstream out(path);
    out << "{\"name\": \"two\"}\n"
        << "{\"obs\": \"\", \"action\": \"w0\", \"reward\": 1}\n"
        << "{\"obs\": \"\", \"action\": \"w1\", \"reward\": 1}\n";
  }
  const auto trace = load_trace(path.string());
  const auto dict = identity_dict(2);
  SolverConfig cfg;
  cfg.max_words = 1;
  NoiseSpec noise;
  noise.wrong_action_prob = 1.0;  // every demonstration is the other action
  const auto report = evaluate(trace, dict, "oracle", cfg, noise);
  // the solver faithfully recovers the demonstrated action, which is wrong
  CHECK(report.accuracy == 0.0);
  CHECK(report.reward == 0.0);
}

TEST_CASE("sweep emits per-repeat rows plus one aggregate per cell") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  SolverConfig cfg;
  cfg.beam_width = 3;
  NoiseSpec noise;
  noise.snr = 3.0;
  noise.seed = 5;
  const auto rows = sweep(trace, game_dict(), {"iomp"}, cfg, {noise}, 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].repeat == 0);
  CHECK(rows[1].repeat == 1);
  CHECK(rows[2].repeat == 2);
  CHECK(rows[3].repeat == -1);
  const double mean = (rows[0].accuracy + rows[1].accuracy + rows[2].accuracy) / 3.0;
  CHECK(rows[3].accuracy == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("sweep output is byte-identical across runs up to timing") {
  const auto trace = load_trace(kData + "/troll_quest.jsonl");
  SolverConfig cfg;
  cfg.beam_width = 2;
  NoiseSpec a, b;
  a.snr = 2.0;
  a.seed = 7;
  b.snr = kInf;
  b.seed = 7;
  std::ostringstream first, second;
  write_sweep_csv(first, sweep(trace, game_dict(), {"iomp", "omp"}, cfg, {a, b}, 2));
  write_sweep_csv(second, sweep(trace, game_dict(), {"iomp", "omp"}, cfg, {a, b}, 2));
  CHECK(drop_last_column(first.str()) == drop_last_column(second.str()));
  CHECK(first.str().substr(0, first.str().find('\n')) ==
        "trace,solver,K,L,snr,wrong_p,synonym_p,seed,repeat,accuracy,reward,mean_step_ms");
  CHECK(first.str().find("inf") != std::string::npos);
}

TEST_CASE("bench runs every variant over the same measurement set") {
  const auto& dict = game_dict();
  SolverConfig base;
  std::vector<std::pair<std::string, SolverConfig>> variants;
  SolverConfig k1 = base;
  k1.beam_width = 1;
  SolverConfig k3 = base;
  k3.beam_width = 3;
  variants.emplace_back("iomp", k1);
  variants.emplace_back("ikomp", k3);
  variants.emplace_back("omp", base);
  const auto rows = bench_runtime(dict, variants, 10, 99);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.mean_ms > 0.0);
    CHECK(row.median_ms > 0.0);
    CHECK(row.p95_ms >= row.median_ms);
    CHECK(row.samples == 10);
  }
  CHECK_THROWS_AS(bench_runtime(dict, variants, 5, 99), std::invalid_argument);
}

TEST_CASE("omp and the single-beam integer variant share a runtime class") {
  const auto& dict = game_dict();
  SolverConfig cfg;
  std::vector<std::pair<std::string, SolverConfig>> variants;
  variants.emplace_back("omp", cfg);
  variants.emplace_back("iomp", cfg);
  const auto rows = bench_runtime(dict, variants, 100, 7);
  const double ratio = rows[1].mean_ms / rows[0].mean_ms;
  CHECK(ratio < 3.0);
  CHECK(ratio > 1.0 / 3.0);
}
