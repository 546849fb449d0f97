#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "hyhtm/hierarchy.hpp"
#include "hyhtm/hypspace.hpp"
#include "planted.hpp"

using namespace hyhtm;

namespace {

DocTermRepresentation rep_of(const Eigen::MatrixXd& dense) {
  DocTermRepresentation a;
  a.values = dense.sparseView();
  for (Index i = 0; i < dense.rows(); ++i) a.doc_ids.push_back("d" + std::to_string(i));
  return a;
}

struct Model {
  testing::PlantedFixture fixture;
  DocTermRepresentation a0;
  TermHierarchyMatrix mh;
};

const Model& small_model() {
  static const Model model = [] {
    testing::PlantedConfig pc;
    pc.docs_per_sub = 40;
    Model m{testing::make_planted(pc), {}, {}};
    auto ms = build_similarity_matrix(m.fixture.table, 20, 0.1);
    m.mh = build_hierarchy_matrix(m.fixture.table, 20);
    auto tf = build_tf(m.fixture.corpus);
    m.a0 = build_document_representation(tf, ms, compute_idf(tf, ms), m.fixture.corpus.doc_ids());
    return m;
  }();
  return model;
}

TrainConfig small_config() {
  TrainConfig config;
  config.n_topics_per_node = 3;
  config.max_depth = 2;
  config.min_docs = 30;
  config.k_s = config.k_h = 20;
  return config;
}

void check_partition(const TopicNode& node, int max_depth) {
  CHECK(node.level <= max_depth);
  CHECK(std::is_sorted(node.doc_rows.begin(), node.doc_rows.end()));
  std::set<Index> seen;
  const std::set<Index> parent(node.doc_rows.begin(), node.doc_rows.end());
  for (const auto& child : node.children) {
    CHECK(child.level == node.level + 1);
    CHECK(child.id.rfind(node.id + ".", 0) == 0);
    for (Index r : child.doc_rows) {
      CHECK(parent.count(r) == 1);
      CHECK(seen.insert(r).second);
    }
    check_partition(child, max_depth);
  }
}

}  // namespace

TEST_CASE("argmax assignment") {
  Eigen::MatrixXd w(4, 3);
  w << 0.2, 0.7, 0.1,
       0.5, 0.5, 0.0,
       0.0, 0.0, 0.0,
       0.0, 0.0, 0.3;
  auto p = assign_documents(w);
  CHECK(p.topics[0] == std::vector<Index>{1});
  CHECK(p.topics[1] == std::vector<Index>{0});
  CHECK(p.topics[2] == std::vector<Index>{3});
  CHECK(p.unassigned == std::vector<Index>{2});
}

TEST_CASE("parent to child reweighting") {
  Eigen::MatrixXd h(2, 3);
  h << 0.5, 0.0, 0.2,
       0.0, 0.0, 0.0;
  TermHierarchyMatrix id{sparse_identity(3), 1};
  CHECK(parent_child_reweight(h, 0, id) == Eigen::Vector3d(0.5, 0, 0.2));

  Eigen::MatrixXd rows(3, 3);
  rows << 1, 1, 0,
          0, 1, 0,
          0, 0, 1;
  TermHierarchyMatrix mh{rows.sparseView(), 2};
  CHECK(parent_child_reweight(h, 0, mh) == Eigen::Vector3d(0.5, 0.5, 0.2));
  CHECK(parent_child_reweight(h, 1, mh).isZero());
  CHECK_THROWS_AS(parent_child_reweight(h, 0, TermHierarchyMatrix{sparse_identity(2), 1}), ShapeError);
}

TEST_CASE("next level representation") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2,
       0, 3;
  auto parent = rep_of(a);
  CHECK(Eigen::MatrixXd(next_level_representation(parent, Eigen::Vector2d(1, 1)).values) == a);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, 0, 0, 0;
  auto child = next_level_representation(parent, Eigen::Vector2d(0.5, 0));
  CHECK(Eigen::MatrixXd(child.values) == expected);
  CHECK(child.values.nonZeros() == 1);
  CHECK(next_level_representation(parent, Eigen::Vector2d(0, 0)).values.nonZeros() == 0);

  auto subset = next_level_representation(parent, std::vector<Index>{1}, Eigen::Vector2d(1, 2));
  CHECK(subset.rows() == 1);
  CHECK(subset.values.coeff(0, 1) == 6.0);
  CHECK(subset.doc_ids == std::vector<std::string>{"d1"});
  CHECK_THROWS_AS(next_level_representation(parent, Eigen::Vector3d(1, 1, 1)), ShapeError);
}

TEST_CASE("top words") {
  CHECK(top_words(Eigen::Vector3d(0.1, 0.9, 0.3), 2) == std::vector<Index>{1, 2});
  CHECK(top_words(Eigen::Vector3d(1, 1, 1), 2) == std::vector<Index>{0, 1});
  CHECK(top_words(Eigen::Vector3d(0, 1, 0), 1) == std::vector<Index>{1});
  CHECK(top_words(Eigen::Vector3d(0.1, 0.9, 0.3), 7).size() == 3);
  CHECK_THROWS_AS(top_words(Eigen::Vector3d(1, 1, 1), 0), ContractError);
  Eigen::MatrixXd h(2, 3);
  h << 0, 1, 2, 3, 0, 1;
  CHECK(top_words(h, 1, 2) == std::vector<Index>{0, 2});
}

TEST_CASE("configuration validation") {
  TrainConfig config;
  config.n_topics_per_node = 1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = TrainConfig{};
  config.min_docs = 5;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = TrainConfig{};
  config.max_depth = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  CHECK(parse_reweight_mode("identity") == ReweightMode::identity);
  CHECK_THROWS_AS(parse_reweight_mode("bogus"), ConfigError);
}

TEST_CASE("too few documents give an empty tree") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(5, 4);
  TrainConfig config;
  config.n_topics_per_node = 2;
  config.min_docs = 10;
  auto tree = build_hierarchy(rep_of(a), TermHierarchyMatrix{sparse_identity(4), 1}, config);
  CHECK(tree.empty());
  CHECK(tree.node_count() == 0);
  CHECK_FALSE(tree.diagnostics.message.empty());
}

TEST_CASE("depth one stops at the first level") {
  const auto& m = small_model();
  auto config = small_config();
  config.max_depth = 1;
  auto tree = build_hierarchy(m.a0, m.mh, config);
  REQUIRE(tree.roots.size() == 3);
  for (const auto& root : tree.roots) CHECK(root.children.empty());
  CHECK(tree.diagnostics.factorizations == 1);
  CHECK(tree.diagnostics.peak_live_representations == 1);
}

TEST_CASE("tree invariants on the planted corpus") {
  const auto& m = small_model();
  auto config = small_config();
  std::vector<std::string> factorized;
  auto tree = build_hierarchy(m.a0, m.mh, config,
                              [&](const std::string& path, int, const FactorPair&) { factorized.push_back(path); });
  REQUIRE(tree.roots.size() == 3);
  CHECK(tree.depth() == 2);
  CHECK(tree.diagnostics.factorizations == static_cast<Index>(factorized.size()));
  CHECK(factorized.front().empty());
  CHECK(tree.diagnostics.peak_live_representations <= config.max_depth + 1);

  Index assigned = 0;
  std::set<Index> seen;
  for (const auto& root : tree.roots) {
    check_partition(root, config.max_depth);
    for (Index r : root.doc_rows) CHECK(seen.insert(r).second);
    assigned += static_cast<Index>(root.doc_rows.size());
  }
  CHECK(assigned <= m.a0.rows());

  std::vector<std::vector<Index>> clusters;
  for (const auto& root : tree.roots) clusters.push_back(root.doc_rows);
  CHECK(testing::purity(clusters, m.fixture.root_label) >= 0.8);

  auto order = tree.preorder();
  CHECK(static_cast<Index>(order.size()) == tree.node_count());
  CHECK(order[0]->id == "0");
  if (!order[0]->children.empty()) CHECK(order[1]->id == "0.0");
  for (const auto* node : order) {
    CHECK(node->doc_ids.size() == node->doc_rows.size());
    CHECK((node->term_weights.array() >= 0).all());
  }
}

TEST_CASE("training is deterministic and seed sensitive") {
  const auto& m = small_model();
  auto config = small_config();
  auto t1 = build_hierarchy(m.a0, m.mh, config);
  auto t2 = build_hierarchy(m.a0, m.mh, config);
  auto o1 = t1.preorder(), o2 = t2.preorder();
  REQUIRE(o1.size() == o2.size());
  for (std::size_t i = 0; i < o1.size(); ++i) {
    CHECK(o1[i]->id == o2[i]->id);
    CHECK(o1[i]->term_weights == o2[i]->term_weights);
    CHECK(o1[i]->doc_rows == o2[i]->doc_rows);
  }
}

TEST_CASE("ablation modes run") {
  const auto& m = small_model();
  for (auto mode : {ReweightMode::identity, ReweightMode::uniform}) {
    auto config = small_config();
    config.reweight = mode;
    auto tree = build_hierarchy(m.a0, m.mh, config);
    CHECK(tree.roots.size() == 3);
    CHECK(tree.depth() <= 2);
  }
}

TEST_CASE("live representation counter") {
  LiveRepresentationCounter counter;
  {
    LiveRepresentationCounter::Guard a(counter);
    {
      LiveRepresentationCounter::Guard b(counter);
      CHECK(counter.live() == 2);
    }
    LiveRepresentationCounter::Guard c(counter);
    CHECK(counter.live() == 2);
  }
  CHECK(counter.live() == 0);
  CHECK(counter.peak() == 2);
}
