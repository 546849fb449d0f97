#include "hyhtm/hierarchy.hpp"

#include <algorithm>
#include <numeric>

namespace hyhtm {

const char* to_string(ReweightMode mode) {
  switch (mode) {
    case ReweightMode::hierarchy: return "hierarchy";
    case ReweightMode::identity: return "identity";
    case ReweightMode::uniform: return "uniform";
  }
  return "hierarchy";
}

ReweightMode parse_reweight_mode(const std::string& name) {
  if (name == "hierarchy") return ReweightMode::hierarchy;
  if (name == "identity") return ReweightMode::identity;
  if (name == "uniform") return ReweightMode::uniform;
  throw ConfigError("unknown reweight mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (n_topics_per_node < 2) throw ConfigError("n_topics must be >= 2");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (min_docs < n_topics_per_node) throw ConfigError("min_docs must be >= n_topics");
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must lie in [0, 1]");
  if (k_s < 1 || k_h < 1) throw ConfigError("k_s and k_h must be >= 1");
  if (kept_terms < 0) throw ConfigError("kept_terms must be >= 0");
  nmf_config().validate();
}

NmfConfig TrainConfig::nmf_config() const {
  NmfConfig nmf;
  nmf.n_topics = n_topics_per_node;
  nmf.max_iter = nmf_max_iter;
  nmf.tol = nmf_tol;
  nmf.seed = seed;
  return nmf;
}

Index TopicTree::node_count() const { return static_cast<Index>(preorder().size()); }

int TopicTree::depth() const {
  int depth = 0;
  for (const auto* node : preorder()) depth = std::max(depth, node->level);
  return depth;
}

std::vector<const TopicNode*> TopicTree::preorder() const {
  std::vector<const TopicNode*> out;
  std::vector<const TopicNode*> stack;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.push_back(&*it);
  while (!stack.empty()) {
    const TopicNode* node = stack.back();
    stack.pop_back();
    out.push_back(node);
    for (auto it = node->children.rbegin(); it != node->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

DocumentPartition assign_documents(const Eigen::MatrixXd& w) {
  DocumentPartition partition;
  partition.topics.resize(static_cast<std::size_t>(w.cols()));
  for (Index r = 0; r < w.rows(); ++r) {
    Index best = 0;
    const double max = w.row(r).maxCoeff(&best);  // first maximum on ties
    if (!(max > 0)) {
      partition.unassigned.push_back(r);
      continue;
    }
    partition.topics[static_cast<std::size_t>(best)].push_back(r);
  }
  return partition;
}

Eigen::VectorXd parent_child_reweight(const Eigen::MatrixXd& h, Index topic, const TermHierarchyMatrix& mh) {
  if (topic < 0 || topic >= h.rows()) throw ShapeError("topic index out of range");
  if (mh.entries.rows() != h.cols() || mh.entries.cols() != h.cols())
    throw ShapeError("hierarchy matrix does not match the topic-term width");
  // (M_H^T h_i)^T == h_i M_H
  return mh.entries.transpose() * h.row(topic).transpose();
}

DocTermRepresentation next_level_representation(const DocTermRepresentation& parent, const Eigen::VectorXd& m_ti) {
  std::vector<Index> rows(static_cast<std::size_t>(parent.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  return next_level_representation(parent, rows, m_ti);
}

DocTermRepresentation next_level_representation(const DocTermRepresentation& root, const std::vector<Index>& rows,
                                                const Eigen::VectorXd& m_ti) {
  if (m_ti.size() != root.cols()) throw ShapeError("reweighting vector does not match term count");
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  DocTermRepresentation out;
  out.doc_ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    for (SparseMatrix::InnerIterator it(root.values, src); it; ++it) {
      const double v = it.value() * m_ti[it.col()];
      if (v != 0) triplets.emplace_back(static_cast<Index>(r), it.col(), v);
    }
    if (!root.doc_ids.empty()) out.doc_ids.push_back(root.doc_ids[static_cast<std::size_t>(src)]);
  }
  out.values.resize(static_cast<Index>(rows.size()), root.cols());
  out.values.setFromTriplets(triplets.begin(), triplets.end());
  out.values.makeCompressed();
  return out;
}

std::vector<Index> top_words(const Eigen::VectorXd& weights, Index n) {
  if (n < 1) throw ContractError("top_words: n must be >= 1");
  std::vector<Index> order(static_cast<std::size_t>(weights.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto take = static_cast<std::ptrdiff_t>(std::min<Index>(n, weights.size()));
  std::partial_sort(order.begin(), order.begin() + take, order.end(), [&](Index a, Index b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(take));
  return order;
}

std::vector<Index> top_words(const Eigen::MatrixXd& h, Index topic, Index n) {
  if (topic < 0 || topic >= h.rows()) throw ShapeError("topic index out of range");
  return top_words(Eigen::VectorXd(h.row(topic).transpose()), n);
}

namespace {

class HierarchyBuilder {
 public:
  HierarchyBuilder(const DocTermRepresentation& a0, const TermHierarchyMatrix& mh, const TrainConfig& config,
                   const FactorizationHook& hook)
      : a0_(a0), mh_(mh), config_(config), hook_(hook) {}

  std::vector<TopicNode> grow(const DocTermRepresentation& a, const std::vector<Index>& rows, int level,
                              const std::string& path) {
    if (level > config_.max_depth) return {};
    Index nonzero_rows = 0;
    for (Index r = 0; r < a.rows(); ++r) nonzero_rows += a.values.outerIndexPtr()[r + 1] > a.values.outerIndexPtr()[r];
    if (nonzero_rows < config_.min_docs) return {};

    FactorPair factors = factorize(a.values, config_.nmf_config());
    ++diagnostics.factorizations;
    if (hook_) hook_(path, level, factors);
    DocumentPartition partition = assign_documents(factors.W);
    diagnostics.unassigned_documents += static_cast<Index>(partition.unassigned.size());
    if (!partition.unassigned.empty())
      log::info(std::to_string(partition.unassigned.size()) + " documents unassigned at node '" + path + "'");

    std::vector<TopicNode> nodes;
    nodes.reserve(static_cast<std::size_t>(config_.n_topics_per_node));
    for (Index i = 0; i < factors.H.rows(); ++i) {
      TopicNode node;
      node.id = path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
      node.level = level;
      node.topic_index = i;
      node.term_weights = factors.H.row(i).transpose();
      node.top_terms = ranked_terms(node.term_weights);
      for (Index local : partition.topics[static_cast<std::size_t>(i)]) {
        const Index row = rows[static_cast<std::size_t>(local)];
        node.doc_rows.push_back(row);
        node.doc_ids.push_back(a0_.doc_ids.empty() ? "row-" + std::to_string(row)
                                                   : a0_.doc_ids[static_cast<std::size_t>(row)]);
      }

      const bool expandable = level + 1 <= config_.max_depth &&
                              static_cast<Index>(node.doc_rows.size()) >= config_.min_docs &&
                              node.term_weights.maxCoeff() > 0;
      if (expandable) {
        const Eigen::VectorXd m_ti = reweighting(factors.H, i);
        LiveRepresentationCounter::Guard live(counter);
        const DocTermRepresentation child = next_level_representation(a0_, node.doc_rows, m_ti);
        node.children = grow(child, node.doc_rows, level + 1, node.id);
      }
      nodes.push_back(std::move(node));
    }
    return nodes;
  }

  LiveRepresentationCounter counter;
  TreeDiagnostics diagnostics;

 private:
  Eigen::VectorXd reweighting(const Eigen::MatrixXd& h, Index topic) const {
    switch (config_.reweight) {
      case ReweightMode::identity: return h.row(topic).transpose();
      case ReweightMode::uniform: return Eigen::VectorXd::Ones(h.cols());
      case ReweightMode::hierarchy: break;
    }
    return parent_child_reweight(h, topic, mh_);
  }

  std::vector<Index> ranked_terms(const Eigen::VectorXd& weights) const {
    const Index nonzero = (weights.array() > 0).count();
    const Index keep = config_.kept_terms > 0 ? std::min(config_.kept_terms, nonzero) : nonzero;
    if (keep == 0) return {};
    return top_words(weights, keep);
  }

  const DocTermRepresentation& a0_;
  const TermHierarchyMatrix& mh_;
  const TrainConfig& config_;
  const FactorizationHook& hook_;
};

}  // namespace

TopicTree build_hierarchy(const DocTermRepresentation& a0, const TermHierarchyMatrix& mh, const TrainConfig& config,
                          const FactorizationHook& on_factorization) {
  config.validate();
  if (config.reweight == ReweightMode::hierarchy &&
      (mh.entries.rows() != a0.cols() || mh.entries.cols() != a0.cols()))
    throw ShapeError("hierarchy matrix is " + std::to_string(mh.entries.rows()) + "x" +
                     std::to_string(mh.entries.cols()) + ", representation has " + std::to_string(a0.cols()) +
                     " terms");

  TopicTree tree;
  tree.config = config;
  HierarchyBuilder builder(a0, mh, config, on_factorization);
  {
    LiveRepresentationCounter::Guard live(builder.counter);
    std::vector<Index> rows(static_cast<std::size_t>(a0.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    tree.roots = builder.grow(a0, rows, 1, "");
  }
  tree.diagnostics = builder.diagnostics;
  tree.diagnostics.peak_live_representations = builder.counter.peak();
  if (tree.roots.empty()) {
    tree.diagnostics.message = "root representation has fewer than min_docs (" + std::to_string(config.min_docs) +
                               ") nonzero documents";
    log::warning(tree.diagnostics.message);
  }
  return tree;
}

}  // namespace hyhtm
