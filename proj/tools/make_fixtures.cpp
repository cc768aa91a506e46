// Regenerates the synthetic embedding fixtures under data/: a GloVe-style
// text file, the game word list and the tag lexicon. The embeddings are not
// trained; they are drawn to mimic the geometry of low-dimensional word
// vectors: every word shares a common direction (which drives the overall
// coherence up) and synonym clusters sit close together (which produces the
// most-coherent column pairs). Output is deterministic for a given seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bowrec/dictionary.hpp"
#include "bowrec/random.hpp"

namespace {

constexpr int kDim = 50;
std::uint64_t g_seed = 271828;
double g_common_weight = 5.0;   // shared-direction strength
double g_cluster_noise = 0.28;  // in-cluster spread
constexpr double kScaleMin = 2.0;
constexpr double kScaleMax = 6.0;

struct WordSpec {
  const char* token;
  const char* tag;      // verb | object | direction | preposition
  int cluster = -1;     // words with the same cluster share most of their vector
  bool filler = false;  // present in the embeddings file but not in the game list
};

// The 112-word game vocabulary plus a few stop words that only live in the
// embeddings file (they exercise the word-filter path).
const std::vector<WordSpec> kTable = {
    // clang-format off
    {"the", "", -1, true}, {"a", "", -1, true}, {"an", "", -1, true}, {"of", "", -1, true},
    // verbs
    {"take", "verb", 0}, {"get", "verb", 0}, {"grab", "verb", 0},
    {"drop", "verb", 1}, {"throw", "verb", 1}, {"discard", "verb", 1},
    {"kill", "verb", 2}, {"attack", "verb", 2}, {"slay", "verb", 2},
    {"go", "verb", 3}, {"walk", "verb", 3}, {"run", "verb", 3}, {"move", "verb", 3},
    {"open", "verb"}, {"close", "verb"}, {"enter", "verb"}, {"climb", "verb"},
    {"turn", "verb"}, {"put", "verb"}, {"tie", "verb"}, {"untie", "verb"},
    {"pray", "verb"}, {"wave", "verb"}, {"read", "verb"}, {"light", "verb"},
    {"douse", "verb"}, {"ring", "verb"}, {"dig", "verb"}, {"pour", "verb"}, {"push", "verb"},
    {"and", "", -1, true}, {"is", "", -1, true},
    // directions; compass words sit close together, as in trained embeddings
    {"north", "direction", 6}, {"south", "direction", 6}, {"east", "direction", 6},
    {"west", "direction", 6},
    {"northeast", "direction", 7}, {"northwest", "direction", 7}, {"southeast", "direction", 7},
    {"southwest", "direction", 7}, {"up", "direction", 8}, {"down", "direction", 8},
    {"out", "direction"},
    // prepositions
    {"with", "preposition"}, {"in", "preposition"}, {"to", "preposition"},
    {"on", "preposition"}, {"at", "preposition"}, {"from", "preposition"},
    // objects; direct objects of the walkthrough's preposition sentences
    // ("kill troll with sword", "put egg in case") precede their instruments
    {"window", "object"}, {"door", "object"}, {"trap", "object"}, {"rug", "object"},
    {"lamp", "object", 4}, {"lantern", "object", 4},
    {"troll", "object"}, {"egg", "object"}, {"sword", "object"}, {"knife", "object"},
    {"rope", "object"}, {"railing", "object"},
    {"torch", "object"}, {"coffin", "object"}, {"sceptre", "object"}, {"pot", "object"},
    {"gold", "object"}, {"case", "object"},
    {"house", "object"}, {"tree", "object"}, {"forest", "object"}, {"kitchen", "object"},
    {"attic", "object"}, {"cellar", "object"}, {"chimney", "object"}, {"gallery", "object"},
    {"painting", "object"},
    {"bag", "object", 5}, {"sack", "object", 5},
    {"it", "", -1, true}, {"you", "", -1, true},
    {"garlic", "object"}, {"water", "object"}, {"bottle", "object"}, {"basket", "object"},
    {"bell", "object"}, {"book", "object"}, {"candles", "object"}, {"match", "object"},
    {"skull", "object"}, {"bar", "object"}, {"emerald", "object"}, {"jade", "object"},
    {"figurine", "object"}, {"bracelet", "object"}, {"coins", "object"}, {"diamond", "object"},
    {"canary", "object"}, {"bauble", "object"}, {"chalice", "object"}, {"trident", "object"},
    {"trunk", "object"}, {"pump", "object"}, {"boat", "object"}, {"buoy", "object"},
    {"shovel", "object"}, {"sand", "object"}, {"scarab", "object"}, {"pearl", "object"},
    {"necklace", "object"}, {"key", "object"}, {"thief", "object"}, {"cyclops", "object"},
    {"grating", "object"}, {"leaves", "object"}, {"mirror", "object"}, {"altar", "object"},
    // clang-format on
};

Eigen::VectorXd draw_unit(bowrec::RandomStream& rng) {
  Eigen::VectorXd v(kDim);
  for (int i = 0; i < kDim; ++i) v[i] = rng.normal();
  return v;
}

// Seed each word's draw by its token, not its table position, so editing
// the vocabulary never perturbs the other vectors.
std::uint64_t token_key(const char* token) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = token; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "data";
  if (argc > 2) g_common_weight = std::stod(argv[2]);
  if (argc > 3) g_cluster_noise = std::stod(argv[3]);
  if (argc > 4) g_seed = std::stoull(argv[4]);
  std::filesystem::create_directories(out_dir);

  bowrec::RandomStream dir_rng(bowrec::mix_seed(g_seed, 999999));
  Eigen::VectorXd common = draw_unit(dir_rng);
  common.normalize();

  int n_clusters = 0;
  for (const auto& spec : kTable) n_clusters = std::max(n_clusters, spec.cluster + 1);
  std::vector<Eigen::VectorXd> anchors;
  for (int c = 0; c < n_clusters; ++c) {
    bowrec::RandomStream rng(bowrec::mix_seed(g_seed, 1000 + static_cast<std::uint64_t>(c)));
    anchors.push_back(draw_unit(rng));
  }

  std::ofstream emb(out_dir + "/glove50_game.txt");
  std::ofstream words(out_dir + "/words_game.txt");
  std::ofstream lexicon(out_dir + "/lexicon_game.txt");
  if (!emb || !words || !lexicon) {
    std::cerr << "cannot write into " << out_dir << "\n";
    return 1;
  }

  int n_game = 0;
  for (std::size_t w = 0; w < kTable.size(); ++w) {
    const auto& spec = kTable[w];
    bowrec::RandomStream rng(bowrec::mix_seed(g_seed, token_key(spec.token)));

    Eigen::VectorXd idio = (spec.cluster >= 0)
                               ? anchors[static_cast<std::size_t>(spec.cluster)] + g_cluster_noise * draw_unit(rng)
                               : draw_unit(rng);
    Eigen::VectorXd v = g_common_weight * common + idio;
    v.normalize();
    v *= kScaleMin + (kScaleMax - kScaleMin) * rng.uniform01();

    emb << spec.token;
    char buf[32];
    for (int i = 0; i < kDim; ++i) {
      std::snprintf(buf, sizeof(buf), " %.6f", v[i]);
      emb << buf;
    }
    emb << '\n';

    if (!spec.filler) {
      ++n_game;
      words << spec.token << '\n';
      lexicon << spec.token << ' ' << spec.tag << '\n';
      if (std::string(spec.token) == "light") lexicon << "light object\n";  // homograph
    }
  }
  emb.close();
  words.close();
  lexicon.close();

  const auto dict = bowrec::load_dictionary<double>(
      out_dir + "/glove50_game.txt", bowrec::load_word_list(out_dir + "/words_game.txt"));
  const auto report = bowrec::mutual_coherence(dict);
  std::cerr << "wrote " << n_game << " game words (+" << (kTable.size() - static_cast<std::size_t>(n_game))
            << " fillers), m=" << dict.embedding_dim() << ", mu=" << report.mu << " at ("
            << dict.word(report.argmax_pair.first) << ", " << dict.word(report.argmax_pair.second)
            << "), sparsity guarantee " << report.sparsity_guarantee << "\n";
  return 0;
}
