#include "hyhtm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hyhtm {

namespace {

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::optional<double> mean_of_present(std::optional<double> a, std::optional<double> b) {
  std::vector<double> values;
  if (a) values.push_back(*a);
  if (b) values.push_back(*b);
  return mean_of(values);
}

double clamped_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

std::vector<Index> head(const std::vector<Index>& terms, Index n) {
  const auto take = std::min<std::size_t>(terms.size(), static_cast<std::size_t>(std::max<Index>(n, 0)));
  return {terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(take)};
}

}  // namespace

Index CooccurrenceStats::doc_freq(Index term) const {
  auto it = doc_freq_.find(term);
  return it == doc_freq_.end() ? 0 : it->second;
}

Index CooccurrenceStats::joint_doc_freq(Index a, Index b) const {
  if (a == b) return doc_freq(a);
  auto it = joint_.find(std::minmax(a, b));
  return it == joint_.end() ? 0 : it->second;
}

CooccurrenceStats build_stats(const Corpus& corpus, const std::vector<Index>& terms_of_interest) {
  CooccurrenceStats stats;
  stats.doc_count_ = corpus.num_documents();
  const std::set<Index> wanted(terms_of_interest.begin(), terms_of_interest.end());
  for (Index t : wanted) {
    if (t < 0 || t >= corpus.vocabulary.size()) throw ContractError("build_stats: term index out of range");
    stats.doc_freq_[t] = 0;
  }
  if (wanted.empty()) return stats;

  std::vector<Index> present;
  for (const auto& doc : corpus.documents) {
    present.clear();
    for (Index t : doc.tokens)
      if (wanted.count(t)) present.push_back(t);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    for (std::size_t i = 0; i < present.size(); ++i) {
      ++stats.doc_freq_[present[i]];
      for (std::size_t j = i + 1; j < present.size(); ++j) ++stats.joint_[{present[i], present[j]}];
    }
  }
  return stats;
}

PmiResult pmi(const CooccurrenceStats& stats, Index wi, Index wj) {
  const double fi = static_cast<double>(stats.doc_freq(wi));
  const double fj = static_cast<double>(stats.doc_freq(wj));
  if (fi == 0 || fj == 0 || stats.doc_count() == 0) return {0.0, true};
  const double d = static_cast<double>(stats.doc_count());
  const double joint = (static_cast<double>(stats.joint_doc_freq(wi, wj)) + kJointEpsilon) / d;
  return {std::log(joint / ((fi / d) * (fj / d))), false};
}

std::optional<double> coherence(const std::vector<Index>& topic_terms, const CooccurrenceStats& stats, Index n,
                                Index* degenerate_pairs) {
  const auto terms = head(topic_terms, n);
  if (terms.size() < 2) return std::nullopt;
  double sum = 0;
  Index pairs = 0;
  for (std::size_t i = 0; i + 1 < terms.size(); ++i)
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      const auto r = pmi(stats, terms[i], terms[j]);
      if (r.degenerate && degenerate_pairs) ++*degenerate_pairs;
      sum += r.value;
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

std::optional<double> hierarchical_coherence(const std::vector<Index>& parent_terms,
                                             const std::vector<Index>& child_terms, const CooccurrenceStats& stats,
                                             Index n, Index* degenerate_pairs) {
  const auto parent = head(parent_terms, n);
  const auto child = head(child_terms, n);
  if (parent.empty() || child.empty()) return std::nullopt;
  double sum = 0;
  for (Index p : parent)
    for (Index c : child) {
      const auto r = pmi(stats, p, c);
      if (r.degenerate && degenerate_pairs) ++*degenerate_pairs;
      sum += r.value;
    }
  return sum / static_cast<double>(parent.size() * child.size());
}

std::optional<double> reported_coherence(const std::vector<Index>& topic_terms, const CooccurrenceStats& stats) {
  return mean_of_present(coherence(topic_terms, stats, 5), coherence(topic_terms, stats, 10));
}

std::optional<double> reported_hierarchical_coherence(const std::vector<Index>& parent_terms,
                                                      const std::vector<Index>& child_terms,
                                                      const CooccurrenceStats& stats) {
  return mean_of_present(hierarchical_coherence(parent_terms, child_terms, stats, 5),
                         hierarchical_coherence(parent_terms, child_terms, stats, 10));
}

std::optional<double> topic_specialization(const Eigen::VectorXd& term_weights, const Eigen::VectorXd& corpus_vector) {
  if (term_weights.size() != corpus_vector.size()) throw ShapeError("topic_specialization: length mismatch");
  const double nt = term_weights.norm(), nc = corpus_vector.norm();
  if (nt == 0 || nc == 0) return std::nullopt;
  const double cosine = std::clamp(term_weights.dot(corpus_vector) / (nt * nc), 0.0, 1.0);
  return 1.0 - cosine;
}

Eigen::VectorXd corpus_term_vector(const TermFrequencyMatrix& tf) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(tf.counts.cols());
  for (Index r = 0; r < tf.counts.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(tf.counts, r); it; ++it) v[it.col()] += it.value();
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

Affinity hierarchical_affinity(const TopicTree& tree) {
  std::vector<const TopicNode*> parents;
  for (const auto* node : tree.preorder())
    if (node->level == 2) parents.push_back(node);

  std::vector<double> child, non_child;
  for (const auto* parent : parents) {
    for (const auto* other : parents) {
      const bool own = other == parent;
      for (const auto& grandchild : other->children) {
        if (grandchild.level != 3) continue;
        (own ? child : non_child).push_back(clamped_cosine(parent->term_weights, grandchild.term_weights));
      }
    }
  }
  return {mean_of(child), mean_of(non_child)};
}

EvalReport evaluate(const TopicTree& tree, const Corpus& corpus) {
  const auto nodes = tree.preorder();
  const Index m = corpus.vocabulary.size();
  std::vector<Index> terms;
  for (const auto* node : nodes) {
    if (node->term_weights.size() != m)
      throw ContractError("topic '" + node->id + "' has " + std::to_string(node->term_weights.size()) +
                          " term weights but the corpus vocabulary has " + std::to_string(m) + " terms");
    const auto top = head(node->top_terms, 10);
    for (Index t : top)
      if (t < 0 || t >= m) throw ContractError("topic '" + node->id + "' references an unknown term");
    terms.insert(terms.end(), top.begin(), top.end());
  }

  EvalReport report;
  const auto stats = build_stats(corpus, terms);
  const Eigen::VectorXd corpus_vector = corpus_term_vector(build_tf(corpus));

  std::map<int, std::pair<std::vector<double>, std::vector<double>>> per_level;
  std::map<int, Index> level_counts;
  std::vector<double> all_coherence, all_specialization, all_hier;
  for (const auto* node : nodes) {
    TopicScore score;
    score.id = node->id;
    score.level = node->level;
    score.coherence5 = coherence(node->top_terms, stats, 5, &report.degenerate_pairs);
    score.coherence10 = coherence(node->top_terms, stats, 10, &report.degenerate_pairs);
    score.coherence = mean_of_present(score.coherence5, score.coherence10);
    score.specialization = topic_specialization(node->term_weights, corpus_vector);
    ++level_counts[node->level];
    if (score.coherence) {
      all_coherence.push_back(*score.coherence);
      per_level[node->level].first.push_back(*score.coherence);
    }
    if (score.specialization) {
      all_specialization.push_back(*score.specialization);
      per_level[node->level].second.push_back(*score.specialization);
    }
    report.topics.push_back(std::move(score));

    for (const auto& child : node->children) {
      EdgeScore edge;
      edge.parent = node->id;
      edge.child = child.id;
      edge.coherence5 = hierarchical_coherence(node->top_terms, child.top_terms, stats, 5, &report.degenerate_pairs);
      edge.coherence10 = hierarchical_coherence(node->top_terms, child.top_terms, stats, 10, &report.degenerate_pairs);
      edge.coherence = mean_of_present(edge.coherence5, edge.coherence10);
      if (edge.coherence) all_hier.push_back(*edge.coherence);
      report.edges.push_back(std::move(edge));
    }
  }
  for (const auto& [level, count] : level_counts) {
    LevelScore ls;
    ls.level = level;
    ls.topics = count;
    ls.mean_coherence = mean_of(per_level[level].first);
    ls.mean_specialization = mean_of(per_level[level].second);
    report.levels.push_back(ls);
  }
  report.affinity = hierarchical_affinity(tree);
  report.mean_coherence = mean_of(all_coherence);
  report.mean_hierarchical_coherence = mean_of(all_hier);
  report.mean_specialization = mean_of(all_specialization);
  return report;
}

}  // namespace hyhtm
