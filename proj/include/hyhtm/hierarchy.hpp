#ifndef HYHTM_HIERARCHY_HPP_
#define HYHTM_HIERARCHY_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hyhtm/common.hpp"
#include "hyhtm/corpus.hpp"
#include "hyhtm/nmf.hpp"
#include "hyhtm/term_matrices.hpp"

namespace hyhtm {

/// How a parent topic reweights the representation handed to its children.
enum class ReweightMode {
  hierarchy,  // M_ti = H_i * M_H
  identity,   // M_H replaced by the identity: M_ti = H_i
  uniform,    // M_ti = 1, children see unweighted root rows
};

const char* to_string(ReweightMode mode);
ReweightMode parse_reweight_mode(const std::string& name);

struct TrainConfig {
  Index n_topics_per_node = 10;
  int max_depth = 3;
  Index min_docs = 50;
  double alpha = 0.1;
  Index k_s = 500;
  Index k_h = 500;
  std::uint64_t seed = 42;
  Space space = Space::hyperbolic;
  ReweightMode reweight = ReweightMode::hierarchy;
  int nmf_max_iter = 300;
  double nmf_tol = 1e-5;
  /// Ranked terms kept per node; 0 keeps every term with nonzero weight.
  Index kept_terms = 0;

  void validate() const;
  NmfConfig nmf_config() const;
};

struct TopicNode {
  /// Root-to-node path of topic indices, e.g. "0.3.1".
  std::string id;
  int level = 1;
  Index topic_index = 0;
  Eigen::VectorXd term_weights;
  std::vector<Index> top_terms;
  /// Rows of A_0 assigned to this topic, ascending.
  std::vector<Index> doc_rows;
  std::vector<std::string> doc_ids;
  std::vector<TopicNode> children;
};

struct TreeDiagnostics {
  Index unassigned_documents = 0;
  Index factorizations = 0;
  int peak_live_representations = 0;
  std::string message;
};

struct TopicTree {
  std::vector<TopicNode> roots;
  TrainConfig config;
  TreeDiagnostics diagnostics;

  bool empty() const { return roots.empty(); }
  Index node_count() const;
  int depth() const;
  /// Pre-order (depth-first, children in topic order).
  std::vector<const TopicNode*> preorder() const;
};

/// Counts document-representation matrices alive at once.
class LiveRepresentationCounter {
 public:
  class Guard {
   public:
    explicit Guard(LiveRepresentationCounter& counter) : counter_(counter) { counter_.acquire(); }
    ~Guard() { counter_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    LiveRepresentationCounter& counter_;
  };

  int live() const { return live_; }
  int peak() const { return peak_; }

 private:
  void acquire() { peak_ = std::max(peak_, ++live_); }
  void release() { --live_; }
  int live_ = 0;
  int peak_ = 0;
};

struct DocumentPartition {
  std::vector<std::vector<Index>> topics;
  /// Rows whose topic weights are all zero.
  std::vector<Index> unassigned;
};

/// Each row goes to its argmax topic (lowest index on ties).
DocumentPartition assign_documents(const Eigen::MatrixXd& w);

/// M_ti = 1_i^T H * M_H
Eigen::VectorXd parent_child_reweight(const Eigen::MatrixXd& h, Index topic, const TermHierarchyMatrix& mh);

/// Every row of A scaled entrywise by m_ti.
DocTermRepresentation next_level_representation(const DocTermRepresentation& parent, const Eigen::VectorXd& m_ti);

/// Selected rows of A scaled entrywise by m_ti, without materializing the
/// row subset first.
DocTermRepresentation next_level_representation(const DocTermRepresentation& root, const std::vector<Index>& rows,
                                                const Eigen::VectorXd& m_ti);

std::vector<Index> top_words(const Eigen::MatrixXd& h, Index topic, Index n);
std::vector<Index> top_words(const Eigen::VectorXd& weights, Index n);

/// Receives the node path that was factorized ("" for the root), its level
/// and the factors, e.g. for dumping them to disk.
using FactorizationHook = std::function<void(const std::string&, int, const FactorPair&)>;

TopicTree build_hierarchy(const DocTermRepresentation& a0, const TermHierarchyMatrix& mh, const TrainConfig& config,
                          const FactorizationHook& on_factorization = {});

}  // namespace hyhtm

#endif  // HYHTM_HIERARCHY_HPP_
