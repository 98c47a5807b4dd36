#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "echochamber/matrix.hpp"
#include "echochamber/stance.hpp"

namespace echochamber::stance {

/// Bundled Italian stopword list.
const std::set<std::string, std::less<>>& italian_stopwords();

using Lemmatizer = std::function<std::string(std::string_view)>;

struct VectorizerOptions {
  /// Minimum number of training documents a token must occur in.
  std::size_t min_df = 10;
  std::set<std::string, std::less<>> stopwords = italian_stopwords();
  /// Identity when empty.
  Lemmatizer lemmatizer;
};

/// URLs and mentions stripped, lowercased letter runs, stopwords removed,
/// lemmatized. One document is all of a user's tweets.
std::vector<std::string> document_tokens(const UserHistory& h, const VectorizerOptions& opts);

struct Vocabulary {
  std::vector<std::string> tokens;  // sorted
  std::vector<double> idf;          // ln((1 + N) / (1 + df)) + 1
  std::vector<std::size_t> df;
  std::size_t training_documents = 0;

  std::size_t size() const { return tokens.size(); }
  /// -1 when absent.
  long find(std::string_view token) const;
};

/// Fit the vocabulary on the given tokenized training documents.
/// Throws InvalidArgument if nothing survives the document-frequency cutoff.
Vocabulary fit_vocabulary(std::span<const std::vector<std::string>> documents, std::span<const std::size_t> train,
                          std::size_t min_df);

/// Raw term counts times idf, L2-normalized.
SparseVector tfidf(const Vocabulary& vocab, std::span<const std::string> tokens);

struct BowResult {
  Vocabulary vocabulary;
  std::vector<SparseVector> vectors;  // one per history
};

BowResult build_vocab_and_vectorize(std::span<const UserHistory> histories, std::span<const std::size_t> train_indices,
                                    const VectorizerOptions& opts = {});

}  // namespace echochamber::stance
