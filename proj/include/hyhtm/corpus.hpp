#ifndef HYHTM_CORPUS_HPP_
#define HYHTM_CORPUS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hyhtm/common.hpp"
#include "hyhtm/term_matrices.hpp"

namespace hyhtm {

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Builds a vocabulary in lexicographic order from arbitrary (possibly
  /// repeated) terms. Empty strings are rejected.
  static Vocabulary from_terms(std::vector<std::string> terms);

  Index size() const { return static_cast<Index>(terms_.size()); }
  const std::string& term(Index i) const { return terms_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<Index> find(std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, Index> index_;
};

struct Document {
  std::string id;
  std::vector<Index> tokens;
  bool empty = false;
};

struct Corpus {
  Vocabulary vocabulary;
  std::vector<Document> documents;

  Index num_documents() const { return static_cast<Index>(documents.size()); }
  std::vector<std::string> doc_ids() const;
  /// Throws ContractError if a token is out of range or an id repeats.
  void validate() const;
};

struct RawDocument {
  std::string id;
  std::string text;
};

struct PreprocessConfig {
  /// Extra stopword files. The bundled general and SMART lists are applied
  /// unless use_bundled_stopwords is false.
  std::vector<std::filesystem::path> stopword_lists;
  bool use_bundled_stopwords = true;
  int min_doc_freq = 5;
  int min_token_length = 2;
  bool stem = false;
  bool ratio_filter_enabled = false;
  double ratio_threshold = 0.8;

  void validate() const;
};

/// Lowercased ASCII word tokens: text is split on whitespace and ASCII
/// punctuation; tokens with non-ASCII bytes and purely numeric tokens are
/// dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Plural and common inflection stripping ("studies" -> "study").
std::string light_stem(std::string_view token);

std::unordered_set<std::string> bundled_stopwords();
std::unordered_set<std::string> read_stopword_file(const std::filesystem::path& path);

Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessConfig& config);

/// JSONL ({"id","text"} per line) when the first non-blank character is '{',
/// otherwise one document per line with ids "doc-<line#>".
std::vector<RawDocument> read_raw_documents(const std::filesystem::path& path);

struct TermFrequencyMatrix {
  SparseMatrix counts;
};

struct DocTermRepresentation {
  SparseMatrix values;
  std::vector<std::string> doc_ids;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

TermFrequencyMatrix build_tf(const Corpus& corpus);

/// Similarity-smoothed inverse document frequency. Terms whose smoothed
/// document mass is zero get weight 0.
Eigen::VectorXd compute_idf(const TermFrequencyMatrix& tf, const TermSimilarityMatrix& ms);

/// A = (TF * M_S) scaled column-wise by IDF.
DocTermRepresentation build_document_representation(const TermFrequencyMatrix& tf,
                                                    const TermSimilarityMatrix& ms,
                                                    const Eigen::VectorXd& idf,
                                                    std::vector<std::string> doc_ids = {});

}  // namespace hyhtm

#endif  // HYHTM_CORPUS_HPP_
