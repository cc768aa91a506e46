// Command-line front end: dictionary analysis, single-sentence recovery,
// trace evaluation, noise sweeps and runtime benchmarks.
// Exit codes: 0 ok, 1 usage error, 2 data or config error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bowrec/quest.hpp"

namespace {

using nlohmann::json;
using namespace bowrec;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

json real_or_inf(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

json bow_to_json(const BagOfWords& bow, const EmbeddingDictionary<double>& dict) {
  json obj = json::object();
  for (const auto& [idx, count] : bow.counts) obj[dict.word(idx)] = count;
  return obj;
}

// Lexicon-ordered when possible, dictionary order otherwise.
std::string render_sentence(const BagOfWords& bow, const EmbeddingDictionary<double>& dict,
                            const std::optional<WordLexicon>& lexicon) {
  if (bow.empty()) return "";
  if (lexicon) {
    try {
      return order_words(bow, dict, *lexicon);
    } catch (const std::domain_error&) {
    }
  }
  std::string out;
  for (const auto& [idx, count] : bow.counts)
    for (int c = 0; c < count; ++c) {
      if (!out.empty()) out.push_back(' ');
      out += dict.word(idx);
    }
  return out;
}

json config_to_json(const SolverConfig& cfg) {
  return json{{"K", cfg.beam_width},
              {"L", cfg.max_words},
              {"fista_lambda", cfg.fista_lambda},
              {"fista_tau", cfg.soft_threshold()},
              {"fista_max_iter", cfg.fista_max_iter},
              {"fista_tol", cfg.fista_tol},
              {"fista_nonnegative", cfg.fista_nonnegative},
              {"omp_residual_threshold", cfg.omp_residual_threshold}};
}

json noise_to_json(const NoiseSpec& noise) {
  return json{{"snr", real_or_inf(noise.snr)},
              {"wrong_p", noise.wrong_action_prob},
              {"synonym_p", noise.synonym_prob},
              {"seed", noise.seed}};
}

struct CommonArgs {
  std::string embeddings;
  std::string words;

  EmbeddingDictionary<double> load() const {
    std::optional<std::vector<std::string>> filter;
    if (!words.empty()) filter = load_word_list(words);
    return load_dictionary<double>(embeddings, filter);
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--embeddings", args.embeddings, "embedding text file (token + values per line)")
      ->required();
  cmd->add_option("--words", args.words, "word list restricting and ordering the dictionary");
}

// "ikomp:20" -> (ikomp, K=20); plain ids keep the base config.
std::pair<std::string, SolverConfig> parse_variant(const std::string& spec, const SolverConfig& base) {
  const auto colon = spec.find(':');
  SolverConfig cfg = base;
  std::string id = spec;
  if (colon != std::string::npos) {
    id = spec.substr(0, colon);
    cfg.beam_width = std::stoi(spec.substr(colon + 1));
  }
  return {id, cfg};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bag-of-words recovery from sums of word embeddings"};
  app.require_subcommand(1);

  CommonArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "mutual coherence report for a dictionary");
  add_common(analyze_cmd, analyze_args);

  CommonArgs recover_args;
  std::string recover_sentence, recover_solver = "ikomp", recover_snr = "inf", recover_lexicon;
  SolverConfig recover_cfg;
  std::uint64_t recover_seed = 0;
  auto* recover_cmd = app.add_subcommand("recover", "recover one sentence from its embedding sum");
  add_common(recover_cmd, recover_args);
  recover_cmd->add_option("--sentence", recover_sentence, "sentence to encode and recover")->required();
  recover_cmd->add_option("--solver", recover_solver, "omp|iomp|ikomp|ikomp-paper|fista|oracle");
  recover_cmd->add_option("--K", recover_cfg.beam_width, "beam width");
  recover_cmd->add_option("--L", recover_cfg.max_words, "word budget");
  recover_cmd->add_option("--snr", recover_snr, "signal-to-noise ratio, or inf");
  recover_cmd->add_option("--seed", recover_seed, "noise seed");
  recover_cmd->add_option("--lexicon", recover_lexicon, "tag lexicon for sentence rendering");

  CommonArgs eval_args;
  std::string eval_trace, eval_solver, eval_snr = "inf", eval_synonyms, eval_lexicon;
  SolverConfig eval_cfg;
  NoiseSpec eval_noise;
  auto* eval_cmd = app.add_subcommand("evaluate", "replay a walkthrough trace through a solver");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--trace", eval_trace, "trace file (JSON lines)")->required();
  eval_cmd->add_option("--solver", eval_solver, "omp|iomp|ikomp|ikomp-paper|fista|oracle")->required();
  eval_cmd->add_option("--K", eval_cfg.beam_width, "beam width");
  eval_cmd->add_option("--L", eval_cfg.max_words, "word budget");
  eval_cmd->add_option("--snr", eval_snr, "signal-to-noise ratio, or inf");
  eval_cmd->add_option("--wrong-p", eval_noise.wrong_action_prob, "wrong-demonstration probability");
  eval_cmd->add_option("--synonym-p", eval_noise.synonym_prob, "synonym-substitution probability");
  eval_cmd->add_option("--seed", eval_noise.seed, "noise seed");
  eval_cmd->add_flag("--episode-noise", "draw the Gaussian noise once per episode instead of per step");
  eval_cmd->add_option("--synonyms", eval_synonyms, "synonym table (JSON)");
  eval_cmd->add_option("--lexicon", eval_lexicon, "tag lexicon for sentence rendering");

  CommonArgs sweep_args;
  std::string sweep_trace, sweep_solvers, sweep_snr_grid = "inf", sweep_wrong_grid = "0",
                           sweep_synonym_grid = "0", sweep_synonyms, sweep_out;
  SolverConfig sweep_cfg;
  int sweep_repeats = 1;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "solver x noise grid, CSV output");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--trace", sweep_trace, "trace file (JSON lines)")->required();
  sweep_cmd->add_option("--solvers", sweep_solvers, "comma-separated solver ids")->required();
  sweep_cmd->add_option("--snr-grid", sweep_snr_grid, "comma-separated snr values (inf allowed)");
  sweep_cmd->add_option("--wrong-p-grid", sweep_wrong_grid, "comma-separated probabilities");
  sweep_cmd->add_option("--synonym-p-grid", sweep_synonym_grid, "comma-separated probabilities");
  sweep_cmd->add_option("--repeats", sweep_repeats, "independent repeats per cell");
  sweep_cmd->add_option("--seed", sweep_seed, "base noise seed");
  sweep_cmd->add_flag("--episode-noise", "draw the Gaussian noise once per episode instead of per step");
  sweep_cmd->add_option("--K", sweep_cfg.beam_width, "beam width");
  sweep_cmd->add_option("--L", sweep_cfg.max_words, "word budget");
  sweep_cmd->add_option("--synonyms", sweep_synonyms, "synonym table (JSON)");
  sweep_cmd->add_option("--out", sweep_out, "output CSV path (stdout if omitted)");

  CommonArgs bench_args;
  std::string bench_solvers = "omp,iomp,ikomp:3,ikomp:20,ikomp:112,fista";
  SolverConfig bench_cfg;
  int bench_samples = 100;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "per-call runtime table, CSV output");
  add_common(bench_cmd, bench_args);
  bench_cmd->add_option("--samples", bench_samples, "measurements per solver (>= 10)");
  bench_cmd->add_option("--solvers", bench_solvers, "comma-separated ids, ikomp:K selects the beam");
  bench_cmd->add_option("--L", bench_cfg.max_words, "word budget");
  bench_cmd->add_option("--seed", bench_seed, "sample seed");
  bench_cmd->add_option("--out", bench_out, "output CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(analyze_cmd)) {
      const auto dict = analyze_args.load();
      const auto report = mutual_coherence(dict);
      json out{{"m", dict.embedding_dim()},
               {"d", dict.size()},
               {"mu", report.mu},
               {"argmax_pair",
                json::array({dict.word(report.argmax_pair.first), dict.word(report.argmax_pair.second)})},
               {"sparsity_guarantee", report.sparsity_guarantee},
               {"unbounded", report.unbounded}};
      std::cout << out.dump(2) << "\n";
    } else if (app.got_subcommand(recover_cmd)) {
      const auto dict = recover_args.load();
      std::optional<WordLexicon> lexicon;
      if (!recover_lexicon.empty()) lexicon = load_lexicon(recover_lexicon, &dict);
      const auto gold = sentence_to_bow(recover_sentence, dict);
      EmbeddingSum<double> y = synthesize(dict, gold);
      const double snr = parse_snr(recover_snr);
      if (!std::isinf(snr)) y = add_noise(y, snr, recover_seed);
      const auto candidate = run_solver(recover_solver, dict, y, recover_cfg);
      json out{{"sentence", recover_sentence},
               {"solver", recover_solver},
               {"config", config_to_json(recover_cfg)},
               {"snr", real_or_inf(snr)},
               {"seed", recover_seed},
               {"recovered_sentence", render_sentence(candidate.bow, dict, lexicon)},
               {"recovered_bow", bow_to_json(candidate.bow, dict)},
               {"residual_norm_sq", candidate.residual_norm_sq},
               {"exact", bow_equal(candidate.bow, gold)}};
      std::cout << out.dump(2) << "\n";
    } else if (app.got_subcommand(eval_cmd)) {
      const auto dict = eval_args.load();
      std::optional<WordLexicon> lexicon;
      if (!eval_lexicon.empty()) lexicon = load_lexicon(eval_lexicon, &dict);
      SynonymTable synonyms;
      if (!eval_synonyms.empty()) synonyms = load_synonyms(eval_synonyms);
      eval_noise.snr = parse_snr(eval_snr);
      eval_noise.per_step_noise = eval_cmd->count("--episode-noise") == 0;
      const auto trace = load_trace(eval_trace);
      const auto report = evaluate(trace, dict, eval_solver, eval_cfg, eval_noise, synonyms);
      json steps = json::array();
      for (const auto& sr : report.per_step)
        steps.push_back(json{{"index", sr.index},
                             {"correct", sr.correct},
                             {"recovered_bow", bow_to_json(sr.recovered, dict)},
                             {"recovered_sentence", render_sentence(sr.recovered, dict, lexicon)},
                             {"residual_norm_sq", sr.residual_norm_sq},
                             {"ms", sr.wall_ms}});
      json out{{"trace", report.trace_name},
               {"solver", report.solver_id},
               {"config", config_to_json(report.config)},
               {"noise", noise_to_json(report.noise)},
               {"accuracy", report.accuracy},
               {"reward", report.reward},
               {"total_reward", report.total_reward},
               {"mean_step_ms", report.mean_step_ms()},
               {"steps", steps}};
      std::cout << out.dump(2) << "\n";
    } else if (app.got_subcommand(sweep_cmd)) {
      const auto dict = sweep_args.load();
      SynonymTable synonyms;
      if (!sweep_synonyms.empty()) synonyms = load_synonyms(sweep_synonyms);
      const auto trace = load_trace(sweep_trace);
      std::vector<NoiseSpec> grid;
      for (const auto& snr : split_csv(sweep_snr_grid))
        for (const auto& wrong : split_csv(sweep_wrong_grid))
          for (const auto& synonym : split_csv(sweep_synonym_grid)) {
            NoiseSpec spec;
            spec.snr = parse_snr(snr);
            spec.wrong_action_prob = std::stod(wrong);
            spec.synonym_prob = std::stod(synonym);
            spec.seed = sweep_seed;
            spec.per_step_noise = sweep_cmd->count("--episode-noise") == 0;
            grid.push_back(spec);
          }
      const auto rows =
          sweep(trace, dict, split_csv(sweep_solvers), sweep_cfg, grid, sweep_repeats, synonyms);
      if (sweep_out.empty()) {
        write_sweep_csv(std::cout, rows);
      } else {
        std::ofstream out(sweep_out);
        if (!out) throw std::runtime_error("cannot write '" + sweep_out + "'");
        write_sweep_csv(out, rows);
      }
    } else if (app.got_subcommand(bench_cmd)) {
      const auto dict = bench_args.load();
      std::vector<std::pair<std::string, SolverConfig>> variants;
      for (const auto& spec : split_csv(bench_solvers)) variants.push_back(parse_variant(spec, bench_cfg));
      const auto rows = bench_runtime(dict, variants, bench_samples, bench_seed);
      if (bench_out.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_out);
        if (!out) throw std::runtime_error("cannot write '" + bench_out + "'");
        write_bench_csv(out, rows);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
