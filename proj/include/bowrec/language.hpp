#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bowrec/dictionary.hpp"
#include "bowrec/signal.hpp"

namespace bowrec {

// Part-of-speech tags for the rule-based command orderer. A token may carry
// more than one tag (homograph); the only supported overlap is verb/object.
struct WordLexicon {
  std::unordered_set<std::string> verbs;
  std::unordered_set<std::string> objects;
  std::unordered_set<std::string> directions;
  std::unordered_set<std::string> prepositions;

  bool tagged(const std::string& token) const {
    return verbs.count(token) || objects.count(token) || directions.count(token) ||
           prepositions.count(token);
  }
};

// Lexicon file: one `<token> <tag>` pair per line, tags in
// {verb, object, direction, preposition}; a token may appear on several
// lines. When a dictionary is given, every token must be in it.
template <class Scalar = double>
WordLexicon load_lexicon(const std::string& path, const EmbeddingDictionary<Scalar>* dict = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon '" + path + "'");
  WordLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (toks.size() != 2) throw std::runtime_error(where + ": expected `<token> <tag>`");
    const std::string& token = toks[0];
    const std::string& tag = toks[1];
    if (dict && dict->index_of(token) < 0)
      throw std::runtime_error(where + ": lexicon token '" + token + "' not in dictionary");
    if (tag == "verb")
      lex.verbs.insert(token);
    else if (tag == "object")
      lex.objects.insert(token);
    else if (tag == "direction")
      lex.directions.insert(token);
    else if (tag == "preposition")
      lex.prepositions.insert(token);
    else
      throw std::runtime_error(where + ": unknown tag '" + tag + "'");
  }
  return lex;
}

inline std::vector<std::string> tokenize_sentence(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : sentence) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

template <class Scalar>
BagOfWords sentence_to_bow(std::string_view sentence, const EmbeddingDictionary<Scalar>& dict) {
  const auto tokens = tokenize_sentence(sentence);
  if (tokens.empty()) throw std::invalid_argument("empty sentence");
  BagOfWords bow(static_cast<int>(dict.size()));
  for (const auto& token : tokens) {
    const int idx = dict.index_of(token);
    if (idx < 0) throw std::invalid_argument("unknown token '" + token + "'");
    bow.add(idx);
  }
  return bow;
}

// Orders a recovered word multiset into a command: verbs, then the first
// object word, then prepositions, then the remaining objects, then
// directions; dictionary-index order inside each class, counts emitted as
// repeats. A verb/object homograph reads as a verb unless some other word
// in the bag is verb-tagged. Only used for human-readable output; the
// harness compares bags, not strings.
template <class Scalar>
std::string order_words(const BagOfWords& bow, const EmbeddingDictionary<Scalar>& dict,
                        const WordLexicon& lexicon) {
  if (bow.empty()) throw std::domain_error("cannot order an empty bag of words");

  struct Entry {
    const std::string* token;
    int count;
  };
  std::vector<Entry> verbs, objects, directions, prepositions;

  bool has_plain_verb = false;
  for (const auto& [idx, count] : bow.counts) {
    const std::string& token = dict.word(idx);
    if (lexicon.verbs.count(token) && !lexicon.objects.count(token)) has_plain_verb = true;
  }

  for (const auto& [idx, count] : bow.counts) {  // counts are index-sorted
    const std::string& token = dict.word(idx);
    const bool is_verb = lexicon.verbs.count(token) > 0;
    const bool is_object = lexicon.objects.count(token) > 0;
    if (is_verb && is_object) {
      (has_plain_verb ? objects : verbs).push_back({&token, count});
    } else if (is_verb) {
      verbs.push_back({&token, count});
    } else if (is_object) {
      objects.push_back({&token, count});
    } else if (lexicon.directions.count(token)) {
      directions.push_back({&token, count});
    } else if (lexicon.prepositions.count(token)) {
      prepositions.push_back({&token, count});
    } else {
      throw std::domain_error("word '" + token + "' is not tagged in the lexicon");
    }
  }

  std::vector<const std::string*> out;
  auto emit = [&out](const std::vector<Entry>& entries, std::size_t from = 0) {
    for (std::size_t i = from; i < entries.size(); ++i)
      for (int c = 0; c < entries[i].count; ++c) out.push_back(entries[i].token);
  };

  emit(verbs);
  if (!prepositions.empty() && !objects.empty()) {
    // direct object, then prepositions, then the remaining objects
    for (int c = 0; c < objects[0].count; ++c) out.push_back(objects[0].token);
    emit(prepositions);
    emit(objects, 1);
  } else {
    emit(objects);
    emit(prepositions);
  }
  emit(directions);

  std::string sentence;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) sentence.push_back(' ');
    sentence += *out[i];
  }
  return sentence;
}

}  // namespace bowrec
