#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "bowrec/language.hpp"

using namespace bowrec;

namespace {

// Index order matters for the ordering rules: within a tag class words come
// out in dictionary order, so "troll" precedes "sword" here.
const std::vector<std::string> kWords = {"take", "go",  "kill", "open", "light", "troll",
                                         "sword", "egg", "lamp", "rug",  "north", "with"};

EmbeddingDictionary<double> test_dict() {
  const int d = static_cast<int>(kWords.size());
  DenseMatrix<double> mat = DenseMatrix<double>::Identity(d, d);
  return EmbeddingDictionary<double>(kWords, mat);
}

WordLexicon test_lexicon() {
  WordLexicon lex;
  lex.verbs = {"take", "go", "kill", "open", "light"};
  lex.objects = {"troll", "sword", "egg", "lamp", "rug", "light"};  // "light" is a homograph
  lex.directions = {"north"};
  lex.prepositions = {"with"};
  return lex;
}

BagOfWords bow_of(const EmbeddingDictionary<double>& dict, std::initializer_list<const char*> tokens) {
  BagOfWords bow(static_cast<int>(dict.size()));
  for (const char* t : tokens) bow.add(dict.index_of(t));
  return bow;
}

}  // namespace

TEST_CASE("sentence_to_bow tokenizes, lowercases and counts") {
  const auto dict = test_dict();
  const auto bow = sentence_to_bow("take egg", dict);
  CHECK(bow == bow_of(dict, {"take", "egg"}));
  CHECK(sentence_to_bow("Take  EGG ", dict) == bow);
  CHECK(sentence_to_bow("egg take", dict) == bow);

  const auto repeated = sentence_to_bow("egg egg", dict);
  CHECK(repeated.count_at(dict.index_of("egg")) == 2);
}

TEST_CASE("sentence_to_bow rejects unknown tokens by name") {
  const auto dict = test_dict();
  try {
    sentence_to_bow("take the egg", dict);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'the'") != std::string::npos);
  }
  CHECK_THROWS_AS(sentence_to_bow("   ", dict), std::invalid_argument);
}

TEST_CASE("order_words applies verb-object precedence") {
  const auto dict = test_dict();
  const auto lex = test_lexicon();
  CHECK(order_words(bow_of(dict, {"sword", "take"}), dict, lex) == "take sword");
  CHECK(order_words(bow_of(dict, {"north", "go"}), dict, lex) == "go north");
  CHECK(order_words(bow_of(dict, {"troll", "kill", "with", "sword"}), dict, lex) ==
        "kill troll with sword");
  CHECK(order_words(bow_of(dict, {"north"}), dict, lex) == "north");
}

TEST_CASE("order_words resolves the verb-object homograph") {
  const auto dict = test_dict();
  const auto lex = test_lexicon();
  // no other verb in the bag: read "light" as the verb
  CHECK(order_words(bow_of(dict, {"lamp", "light"}), dict, lex) == "light lamp");
  // another verb present: read "light" as the object
  CHECK(order_words(bow_of(dict, {"light", "take"}), dict, lex) == "take light");
}

TEST_CASE("order_words emits repeated counts and errors on untagged words") {
  const auto dict = test_dict();
  auto lex = test_lexicon();
  BagOfWords bow(static_cast<int>(dict.size()));
  bow.add(dict.index_of("egg"), 2);
  bow.add(dict.index_of("take"));
  CHECK(order_words(bow, dict, lex) == "take egg egg");

  lex.objects.erase("rug");
  try {
    order_words(bow_of(dict, {"rug", "open"}), dict, lex);
    FAIL("expected an exception");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("rug") != std::string::npos);
  }
  CHECK_THROWS_AS(order_words(BagOfWords(static_cast<int>(dict.size())), dict, lex),
                  std::domain_error);
}

TEST_CASE("ordering round-trips at the bag level") {
  const auto dict = test_dict();
  const auto lex = test_lexicon();
  for (const char* sentence : {"take egg", "go north", "kill troll with sword", "open rug",
                               "light lamp", "north", "take sword egg"}) {
    const auto bow = sentence_to_bow(sentence, dict);
    const auto ordered = order_words(bow, dict, lex);
    CHECK(sentence_to_bow(ordered, dict) == bow);
    CHECK(static_cast<int>(tokenize_sentence(ordered).size()) == bow.total());
  }
}

TEST_CASE("load_lexicon parses tags and validates against the dictionary") {
  const auto path = std::filesystem::temp_directory_path() / "bowrec_lexicon.txt";
  {
    std::ofstream out(path);
    out << "take verb\nsword object\nnorth direction\nwith preposition\nlight verb\nlight object\n";
  }
  const auto dict = test_dict();
  const auto lex = load_lexicon(path.string(), &dict);
  CHECK(lex.verbs.count("take"));
  CHECK(lex.directions.count("north"));
  CHECK(lex.verbs.count("light"));
  CHECK(lex.objects.count("light"));

  {
    std::ofstream out(path);
    out << "take verb\nsomething adverb\n";
  }
  CHECK_THROWS_AS(load_lexicon(path.string()), std::runtime_error);

  {
    std::ofstream out(path);
    out << "missing verb\n";
  }
  CHECK_THROWS_AS(load_lexicon(path.string(), &dict), std::runtime_error);
}
