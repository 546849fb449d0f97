#include "hyhtm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hyhtm {

namespace detail {
extern const std::string_view kEnglishStopwords;
extern const std::string_view kSmartStopwords;
}  // namespace detail

namespace {

void add_stopword_lines(std::istream& in, std::unordered_set<std::string>& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string word;
    while (words >> word) {
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      out.insert(word);
    }
  }
}

bool is_separator(unsigned char c) { return c < 0x80 && (std::isspace(c) || std::ispunct(c)); }

bool all_digits(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Vocabulary Vocabulary::from_terms(std::vector<std::string> terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  Vocabulary vocab;
  for (auto& term : terms) {
    if (term.empty()) throw ContractError("vocabulary terms must be non-empty");
    vocab.index_.emplace(term, static_cast<Index>(vocab.terms_.size()));
    vocab.terms_.push_back(std::move(term));
  }
  return vocab;
}

std::optional<Index> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Corpus::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(documents.size());
  for (const auto& doc : documents) ids.push_back(doc.id);
  return ids;
}

void Corpus::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    if (!seen.insert(doc.id).second) throw ContractError("duplicate document id '" + doc.id + "'");
    for (Index t : doc.tokens)
      if (t < 0 || t >= vocabulary.size())
        throw ContractError("token index out of range in document '" + doc.id + "'");
  }
}

void PreprocessConfig::validate() const {
  if (min_doc_freq < 1) throw ConfigError("min_doc_freq must be >= 1");
  if (min_token_length < 1) throw ConfigError("min_token_length must be >= 1");
  if (!(ratio_threshold > 0)) throw ConfigError("ratio_threshold must be > 0");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  bool non_ascii = false;
  auto flush = [&] {
    if (!current.empty() && !non_ascii && !all_digits(current)) tokens.push_back(current);
    current.clear();
    non_ascii = false;
  };
  for (unsigned char c : text) {
    if (is_separator(c)) {
      flush();
    } else {
      if (c >= 0x80) non_ascii = true;
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

std::string light_stem(std::string_view token) {
  std::string s(token);
  if (s.size() > 4 && ends_with(s, "sses")) {
    s.resize(s.size() - 2);
  } else if (s.size() > 4 && ends_with(s, "ies")) {
    s.resize(s.size() - 3);
    s += 'y';
  } else if (s.size() > 3 && ends_with(s, "s") && !ends_with(s, "ss") && !ends_with(s, "us") &&
             !ends_with(s, "is")) {
    s.pop_back();
  }
  return s;
}

std::unordered_set<std::string> bundled_stopwords() {
  std::unordered_set<std::string> words;
  for (auto list : {detail::kEnglishStopwords, detail::kSmartStopwords}) {
    std::istringstream in{std::string(list)};
    add_stopword_lines(in, words);
  }
  return words;
}

std::unordered_set<std::string> read_stopword_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read stopword file " + path.string());
  std::unordered_set<std::string> words;
  add_stopword_lines(in, words);
  return words;
}

Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessConfig& config) {
  config.validate();
  if (raw.empty()) throw CorpusError("no documents");

  std::unordered_set<std::string> stopwords;
  if (config.use_bundled_stopwords) stopwords = bundled_stopwords();
  for (const auto& path : config.stopword_lists) stopwords.merge(read_stopword_file(path));

  std::vector<std::vector<std::string>> docs_tokens;
  docs_tokens.reserve(raw.size());
  std::map<std::string, std::pair<long, long>> counts;  // term -> (doc freq, total count)
  for (const auto& doc : raw) {
    std::vector<std::string> kept;
    for (auto& token : tokenize(doc.text)) {
      if (static_cast<int>(token.size()) < config.min_token_length) continue;
      if (stopwords.count(token)) continue;
      if (config.stem) token = light_stem(token);
      kept.push_back(std::move(token));
    }
    std::unordered_set<std::string> distinct(kept.begin(), kept.end());
    for (const auto& t : distinct) ++counts[t].first;
    for (const auto& t : kept) ++counts[t].second;
    docs_tokens.push_back(std::move(kept));
  }

  std::vector<std::string> terms;
  for (const auto& [term, c] : counts) {
    if (c.first < config.min_doc_freq) continue;
    if (config.ratio_filter_enabled &&
        static_cast<double>(c.second) / static_cast<double>(c.first) < config.ratio_threshold)
      continue;
    terms.push_back(term);
  }

  Corpus corpus;
  corpus.vocabulary = Vocabulary::from_terms(std::move(terms));
  corpus.documents.reserve(raw.size());
  std::size_t n_empty = 0;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    Document doc{raw[d].id, {}, false};
    for (const auto& token : docs_tokens[d])
      if (auto idx = corpus.vocabulary.find(token)) doc.tokens.push_back(*idx);
    doc.empty = doc.tokens.empty();
    n_empty += doc.empty;
    corpus.documents.push_back(std::move(doc));
  }
  if (n_empty == raw.size()) throw CorpusError("all documents are empty after preprocessing");
  if (n_empty > 0) log::info(std::to_string(n_empty) + " documents empty after preprocessing");
  corpus.validate();
  return corpus;
}

std::vector<RawDocument> read_raw_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": not found");
  if (!in) throw ConfigError(path.string() + ": cannot be read");

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  bool jsonl = false;
  for (const auto& line : lines) {
    auto pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;
    jsonl = line[pos] == '{';
    break;
  }

  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (jsonl) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      try {
        auto record = nlohmann::json::parse(line);
        docs.push_back({record.at("id").get<std::string>(), record.at("text").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), i + 1, e.what());
      }
    } else {
      docs.push_back({"doc-" + std::to_string(i + 1), line});
    }
  }
  if (docs.empty()) throw CorpusError(path.string() + ": no documents");
  return docs;
}

TermFrequencyMatrix build_tf(const Corpus& corpus) {
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  for (Index i = 0; i < corpus.num_documents(); ++i)
    for (Index t : corpus.documents[static_cast<std::size_t>(i)].tokens)
      triplets.emplace_back(i, t, 1.0);
  TermFrequencyMatrix tf;
  tf.counts.resize(corpus.num_documents(), corpus.vocabulary.size());
  tf.counts.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
  return tf;
}

Eigen::VectorXd compute_idf(const TermFrequencyMatrix& tf, const TermSimilarityMatrix& ms) {
  const Index m = tf.counts.cols();
  if (ms.entries.rows() != m || ms.entries.cols() != m)
    throw ShapeError("similarity matrix is " + std::to_string(ms.entries.rows()) + "x" +
                     std::to_string(ms.entries.cols()) + ", vocabulary has " + std::to_string(m) +
                     " terms");

  // Row w of the transpose lists every term i with M_S(i, w) != 0.
  const SparseMatrix by_column = ms.entries.transpose();
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(m);
  std::vector<Index> touched;
  for (Index d = 0; d < tf.counts.rows(); ++d) {
    for (SparseMatrix::InnerIterator w(tf.counts, d); w; ++w) {
      if (w.value() == 0) continue;
      for (SparseMatrix::InnerIterator s(by_column, w.col()); s; ++s) {
        if (s.value() == 0) continue;
        if (hits[s.col()] == 0) touched.push_back(s.col());
        sum[s.col()] += s.value();
        ++hits[s.col()];
      }
    }
    for (Index i : touched) {
      mass[i] += sum[i] / hits[i];
      sum[i] = 0;
      hits[i] = 0;
    }
    touched.clear();
  }

  const double n_docs = static_cast<double>(tf.counts.rows());
  Eigen::VectorXd idf(m);
  Index degenerate = 0;
  for (Index i = 0; i < m; ++i) {
    if (mass[i] > 0) {
      idf[i] = std::max(0.0, std::log(n_docs / mass[i]));
    } else {
      idf[i] = 0;
      ++degenerate;
    }
  }
  if (degenerate > 0)
    log::info(std::to_string(degenerate) + " terms have zero similarity mass; IDF set to 0");
  return idf;
}

DocTermRepresentation build_document_representation(const TermFrequencyMatrix& tf,
                                                    const TermSimilarityMatrix& ms,
                                                    const Eigen::VectorXd& idf,
                                                    std::vector<std::string> doc_ids) {
  const Index m = tf.counts.cols();
  if (ms.entries.rows() != m || ms.entries.cols() != m || idf.size() != m)
    throw ShapeError("inconsistent dimensions for document representation");
  if (!doc_ids.empty() && static_cast<Index>(doc_ids.size()) != tf.counts.rows())
    throw ShapeError("doc_ids do not match term-frequency rows");

  SparseMatrix a = (tf.counts * ms.entries).pruned();
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      it.valueRef() *= idf[it.col()];
      if (it.value() < 0 || !std::isfinite(it.value()))
        throw ContractError("negative or non-finite entry in document representation");
    }
  }
  a.prune(0.0);
  a.makeCompressed();
  return {std::move(a), std::move(doc_ids)};
}

}  // namespace hyhtm
