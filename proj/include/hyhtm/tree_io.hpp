#ifndef HYHTM_TREE_IO_HPP_
#define HYHTM_TREE_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hyhtm/corpus.hpp"
#include "hyhtm/hierarchy.hpp"
#include "hyhtm/metrics.hpp"

namespace hyhtm {

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

/// tree.json document. top_k > 0 truncates each node's term list.
nlohmann::json tree_to_json(const TopicTree& tree, const Vocabulary& vocab, Index top_k = 0);

struct LoadedTree {
  TopicTree tree;
  Vocabulary vocabulary;
};

/// With a vocabulary, every term must belong to it (ContractError otherwise).
/// Without one, the vocabulary is the sorted set of terms the tree mentions.
LoadedTree tree_from_json(const nlohmann::json& j, const Vocabulary* vocab = nullptr);
LoadedTree read_tree(const std::filesystem::path& path, const Vocabulary* vocab = nullptr);
void write_tree(const TopicTree& tree, const Vocabulary& vocab, const std::filesystem::path& path, Index top_k = 0);

/// Graphviz rendering, one node per topic labeled with its top terms.
std::string tree_to_dot(const TopicTree& tree, const Vocabulary& vocab, Index top_k = 10);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

}  // namespace hyhtm

#endif  // HYHTM_TREE_IO_HPP_
