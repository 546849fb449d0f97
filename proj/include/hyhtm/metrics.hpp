#ifndef HYHTM_METRICS_HPP_
#define HYHTM_METRICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyhtm/corpus.hpp"
#include "hyhtm/hierarchy.hpp"

namespace hyhtm {

/// Smoothing added to joint document counts so never co-occurring pairs stay finite.
inline constexpr double kJointEpsilon = 1e-12;

/// Document-level presence counts for a fixed set of terms.
class CooccurrenceStats {
 public:
  Index doc_count() const { return doc_count_; }
  bool contains(Index term) const { return doc_freq_.count(term) > 0; }
  Index doc_freq(Index term) const;
  Index joint_doc_freq(Index a, Index b) const;

  friend CooccurrenceStats build_stats(const Corpus& corpus, const std::vector<Index>& terms_of_interest);

 private:
  Index doc_count_ = 0;
  std::unordered_map<Index, Index> doc_freq_;
  std::map<std::pair<Index, Index>, Index> joint_;
};

CooccurrenceStats build_stats(const Corpus& corpus, const std::vector<Index>& terms_of_interest);

struct PmiResult {
  double value = 0;
  /// Set when a marginal was zero and the value was forced to 0.
  bool degenerate = false;
};

PmiResult pmi(const CooccurrenceStats& stats, Index wi, Index wj);

/// Mean PMI over unordered pairs of the top-n terms. Topics shorter than n use
/// every term they have; fewer than two terms gives no value.
std::optional<double> coherence(const std::vector<Index>& topic_terms, const CooccurrenceStats& stats, Index n,
                                Index* degenerate_pairs = nullptr);

/// Mean PMI over the full n x n grid of parent and child top terms, self-pairs included.
std::optional<double> hierarchical_coherence(const std::vector<Index>& parent_terms,
                                             const std::vector<Index>& child_terms, const CooccurrenceStats& stats,
                                             Index n, Index* degenerate_pairs = nullptr);

/// Average of the top-5 and top-10 scores, as reported per topic and per edge.
std::optional<double> reported_coherence(const std::vector<Index>& topic_terms, const CooccurrenceStats& stats);
std::optional<double> reported_hierarchical_coherence(const std::vector<Index>& parent_terms,
                                                      const std::vector<Index>& child_terms,
                                                      const CooccurrenceStats& stats);

/// 1 - cos(topic, corpus).
std::optional<double> topic_specialization(const Eigen::VectorXd& term_weights, const Eigen::VectorXd& corpus_vector);

/// Unit-L2 column sums of the term-frequency matrix.
Eigen::VectorXd corpus_term_vector(const TermFrequencyMatrix& tf);

struct Affinity {
  std::optional<double> child;
  std::optional<double> non_child;
};

/// Level-2 topics against level-3 topics: mean cosine with their own children
/// and with every other level-3 topic.
Affinity hierarchical_affinity(const TopicTree& tree);

struct TopicScore {
  std::string id;
  int level = 0;
  std::optional<double> coherence5, coherence10, coherence;
  std::optional<double> specialization;
};

struct EdgeScore {
  std::string parent, child;
  std::optional<double> coherence5, coherence10, coherence;
};

struct LevelScore {
  int level = 0;
  Index topics = 0;
  std::optional<double> mean_coherence;
  std::optional<double> mean_specialization;
};

struct EvalReport {
  std::vector<TopicScore> topics;
  std::vector<EdgeScore> edges;
  std::vector<LevelScore> levels;
  Affinity affinity;
  std::optional<double> mean_coherence;
  std::optional<double> mean_hierarchical_coherence;
  std::optional<double> mean_specialization;
  Index degenerate_pairs = 0;
};

/// Throws ContractError when the tree's term vectors do not match the corpus vocabulary.
EvalReport evaluate(const TopicTree& tree, const Corpus& corpus);

}  // namespace hyhtm

#endif  // HYHTM_METRICS_HPP_
