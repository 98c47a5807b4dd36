#include "echochamber/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "echochamber/text.hpp"

namespace echochamber::stance {

const std::set<std::string, std::less<>>& italian_stopwords() {
  static const std::set<std::string, std::less<>> kWords = {
      "a",      "ad",     "al",     "alla",   "alle",   "allo",   "agli",   "ai",     "anche",  "avere",
      "aveva",  "c",      "che",    "chi",    "ci",     "coi",    "col",    "come",   "con",    "contro",
      "cosa",   "cui",    "d",      "da",     "dal",    "dalla",  "dalle",  "dallo",  "dagli",  "dai",
      "degli",  "dei",    "del",    "della",  "delle",  "dello",  "di",     "dove",   "e",      "ed",
      "era",    "erano",  "essere", "fa",     "fino",   "fra",    "gli",    "ha",     "hai",    "hanno",
      "ho",     "i",      "il",     "in",     "io",     "l",      "la",     "le",     "lei",    "li",
      "lo",     "loro",   "lui",    "ma",     "me",     "mi",     "mia",    "mio",    "ne",     "negli",
      "nei",    "nel",    "nella",  "nelle",  "nello",  "noi",    "non",    "nostra", "nostro", "o",
      "per",    "perché", "però",   "più",    "poi",    "quale",  "quando", "quanto", "quella", "quelle",
      "quelli", "quello", "questa", "queste", "questi", "questo", "se",     "sei",    "si",     "sia",
      "siamo",  "siete",  "solo",   "sono",   "sta",    "stata",  "stato",  "su",     "sua",    "sue",
      "sugli",  "sui",    "sul",    "sulla",  "sulle",  "suo",    "suoi",   "te",     "ti",     "tra",
      "tu",     "tua",    "tuo",    "tutti",  "tutto",  "un",     "una",    "uno",    "vi",     "voi",
      "è",      "già",    "rt",     "via",    "amp",    "qui",    "così",   "ogni",   "fare",   "fatto",
  };
  return kWords;
}

std::vector<std::string> document_tokens(const UserHistory& h, const VectorizerOptions& opts) {
  std::vector<std::string> out;
  for (const auto& t : h.tweets) {
    for (auto& tok : text::letter_tokens(text::strip_urls_and_mentions(t.text))) {
      if (opts.stopwords.contains(tok)) continue;
      if (opts.lemmatizer) {
        tok = opts.lemmatizer(tok);
        if (tok.empty()) continue;
      }
      out.push_back(std::move(tok));
    }
  }
  return out;
}

long Vocabulary::find(std::string_view token) const {
  auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
  if (it == tokens.end() || *it != token) return -1;
  return static_cast<long>(it - tokens.begin());
}

Vocabulary fit_vocabulary(std::span<const std::vector<std::string>> documents, std::span<const std::size_t> train,
                          std::size_t min_df) {
  if (train.empty()) throw InvalidArgument("no training documents");
  std::map<std::string, std::size_t> df;
  for (std::size_t i : train) {
    std::vector<std::string> unique = documents[i];
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& tok : unique) ++df[tok];
  }
  Vocabulary v;
  v.training_documents = train.size();
  const auto n = static_cast<double>(train.size());
  for (const auto& [tok, count] : df) {
    if (count < min_df) continue;
    v.tokens.push_back(tok);
    v.df.push_back(count);
    v.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (v.tokens.empty())
    throw InvalidArgument("vocabulary is empty after the document-frequency cutoff of " + std::to_string(min_df) +
                          "; lower min_df");
  return v;
}

SparseVector tfidf(const Vocabulary& vocab, std::span<const std::string> tokens) {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokens) {
    long id = vocab.find(tok);
    if (id >= 0) counts[static_cast<std::uint32_t>(id)] += 1.0;
  }
  SparseVector out;
  double norm = 0.0;
  for (const auto& [id, tf] : counts) {
    double w = tf * vocab.idf[id];
    out.emplace_back(id, w);
    norm += w * w;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [_, w] : out) w /= norm;
  }
  return out;
}

BowResult build_vocab_and_vectorize(std::span<const UserHistory> histories, std::span<const std::size_t> train_indices,
                                    const VectorizerOptions& opts) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(histories.size());
  for (const auto& h : histories) docs.push_back(document_tokens(h, opts));
  BowResult r;
  r.vocabulary = fit_vocabulary(docs, train_indices, opts.min_df);
  r.vectors.reserve(docs.size());
  for (const auto& d : docs) r.vectors.push_back(tfidf(r.vocabulary, d));
  return r;
}

}  // namespace echochamber::stance
