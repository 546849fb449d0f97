#include "hyhtm/tree_io.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace hyhtm {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(10);
  out << *v;
  return out.str();
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

json node_to_json(const TopicNode& node, const Vocabulary& vocab, Index top_k) {
  json terms = json::array();
  const auto n = top_k > 0 ? std::min<std::size_t>(node.top_terms.size(), static_cast<std::size_t>(top_k))
                           : node.top_terms.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Index t = node.top_terms[i];
    terms.push_back({{"term", vocab.term(t)}, {"weight", node.term_weights[t]}});
  }
  json children = json::array();
  for (const auto& child : node.children) children.push_back(child.id);
  return {{"id", node.id},
          {"level", node.level},
          {"top_terms", std::move(terms)},
          {"doc_ids", node.doc_ids},
          {"children", std::move(children)}};
}

}  // namespace

json config_to_json(const TrainConfig& c) {
  return {{"n_topics", c.n_topics_per_node}, {"max_depth", c.max_depth},  {"min_docs", c.min_docs},
          {"alpha", c.alpha},                {"k_s", c.k_s},              {"k_h", c.k_h},
          {"seed", c.seed},                  {"space", to_string(c.space)}, {"reweight", to_string(c.reweight)},
          {"nmf_max_iter", c.nmf_max_iter},  {"nmf_tol", c.nmf_tol},      {"kept_terms", c.kept_terms}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.n_topics_per_node = j.value("n_topics", c.n_topics_per_node);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_docs = j.value("min_docs", c.min_docs);
  c.alpha = j.value("alpha", c.alpha);
  c.k_s = j.value("k_s", c.k_s);
  c.k_h = j.value("k_h", c.k_h);
  c.seed = j.value("seed", c.seed);
  c.space = parse_space(j.value("space", std::string(to_string(c.space))));
  c.reweight = parse_reweight_mode(j.value("reweight", std::string(to_string(c.reweight))));
  c.nmf_max_iter = j.value("nmf_max_iter", c.nmf_max_iter);
  c.nmf_tol = j.value("nmf_tol", c.nmf_tol);
  c.kept_terms = j.value("kept_terms", c.kept_terms);
  return c;
}

json tree_to_json(const TopicTree& tree, const Vocabulary& vocab, Index top_k) {
  json nodes = json::array();
  for (const auto* node : tree.preorder()) nodes.push_back(node_to_json(*node, vocab, top_k));
  return {{"config", config_to_json(tree.config)}, {"nodes", std::move(nodes)}};
}

LoadedTree tree_from_json(const json& j, const Vocabulary* vocab) {
  LoadedTree loaded;
  try {
    const json& nodes = j.at("nodes");
    if (!nodes.is_array()) throw ContractError("tree.json: 'nodes' must be an array");
    if (j.contains("config")) loaded.tree.config = config_from_json(j.at("config"));

    if (vocab) {
      loaded.vocabulary = *vocab;
    } else {
      std::vector<std::string> terms;
      for (const auto& node : nodes)
        for (const auto& t : node.at("top_terms")) terms.push_back(t.at("term").get<std::string>());
      loaded.vocabulary = Vocabulary::from_terms(std::move(terms));
    }
    const Index m = loaded.vocabulary.size();

    std::map<std::string, TopicNode> by_id;
    std::map<std::string, std::vector<std::string>> children_of;
    std::vector<std::string> order;
    std::set<std::string> referenced;
    for (const auto& jn : nodes) {
      TopicNode node;
      node.id = jn.at("id").get<std::string>();
      node.level = jn.at("level").get<int>();
      const auto dot = node.id.rfind('.');
      node.topic_index = std::stol(dot == std::string::npos ? node.id : node.id.substr(dot + 1));
      node.term_weights = Eigen::VectorXd::Zero(m);
      for (const auto& t : jn.at("top_terms")) {
        const auto term = t.at("term").get<std::string>();
        const auto idx = loaded.vocabulary.find(term);
        if (!idx) throw ContractError("tree.json: term '" + term + "' is not in the corpus vocabulary");
        node.top_terms.push_back(*idx);
        node.term_weights[*idx] = t.at("weight").get<double>();
      }
      node.doc_ids = jn.at("doc_ids").get<std::vector<std::string>>();
      auto kids = jn.at("children").get<std::vector<std::string>>();
      referenced.insert(kids.begin(), kids.end());
      children_of[node.id] = std::move(kids);
      order.push_back(node.id);
      if (!by_id.emplace(node.id, std::move(node)).second)
        throw ContractError("tree.json: duplicate node id '" + order.back() + "'");
    }

    // Attach bottom-up so every child is complete before it is moved.
    std::function<TopicNode(const std::string&, int)> take = [&](const std::string& id, int depth) {
      if (depth > 64) throw ContractError("tree.json: node nesting too deep");
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ContractError("tree.json: unknown child id '" + id + "'");
      TopicNode node = std::move(it->second);
      by_id.erase(it);
      for (const auto& child : children_of[id]) node.children.push_back(take(child, depth + 1));
      return node;
    };
    for (const auto& id : order)
      if (!referenced.count(id)) loaded.tree.roots.push_back(take(id, 0));
  } catch (const json::exception& e) {
    throw ContractError(std::string("tree.json: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ContractError("tree.json: malformed node id");
  }
  return loaded;
}

LoadedTree read_tree(const std::filesystem::path& path, const Vocabulary* vocab) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": not found");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ContractError(path.string() + ": " + e.what());
  }
  return tree_from_json(j, vocab);
}

void write_tree(const TopicTree& tree, const Vocabulary& vocab, const std::filesystem::path& path, Index top_k) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << tree_to_json(tree, vocab, top_k).dump(2) << '\n';
}

std::string tree_to_dot(const TopicTree& tree, const Vocabulary& vocab, Index top_k) {
  std::ostringstream out;
  out << "digraph topics {\n  node [shape=box];\n";
  const auto nodes = tree.preorder();
  for (const auto* node : nodes) {
    std::string label = node->id + ":";
    const auto n = std::min<std::size_t>(node->top_terms.size(), static_cast<std::size_t>(std::max<Index>(top_k, 0)));
    for (std::size_t i = 0; i < n; ++i) label += (i == 0 ? " " : ", ") + vocab.term(node->top_terms[i]);
    out << "  \"" << dot_escape(node->id) << "\" [label=\"" << dot_escape(label) << "\"];\n";
  }
  for (const auto* node : nodes)
    for (const auto& child : node->children)
      out << "  \"" << dot_escape(node->id) << "\" -> \"" << dot_escape(child.id) << "\";\n";
  out << "}\n";
  return out.str();
}

json report_to_json(const EvalReport& report) {
  json topics = json::array(), edges = json::array(), levels = json::array();
  for (const auto& t : report.topics)
    topics.push_back({{"id", t.id},
                      {"level", t.level},
                      {"coherence_top5", optional_number(t.coherence5)},
                      {"coherence_top10", optional_number(t.coherence10)},
                      {"coherence", optional_number(t.coherence)},
                      {"specialization", optional_number(t.specialization)}});
  for (const auto& e : report.edges)
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"hierarchical_coherence_top5", optional_number(e.coherence5)},
                     {"hierarchical_coherence_top10", optional_number(e.coherence10)},
                     {"hierarchical_coherence", optional_number(e.coherence)}});
  for (const auto& l : report.levels)
    levels.push_back({{"level", l.level},
                      {"topics", l.topics},
                      {"mean_coherence", optional_number(l.mean_coherence)},
                      {"mean_specialization", optional_number(l.mean_specialization)}});
  return {{"topics", std::move(topics)},
          {"edges", std::move(edges)},
          {"levels", std::move(levels)},
          {"summary",
           {{"coherence", optional_number(report.mean_coherence)},
            {"hierarchical_coherence", optional_number(report.mean_hierarchical_coherence)},
            {"specialization", optional_number(report.mean_specialization)},
            {"child_affinity", optional_number(report.affinity.child)},
            {"non_child_affinity", optional_number(report.affinity.non_child)},
            {"degenerate_pairs", report.degenerate_pairs}}}};
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "kind,id,level,coherence_top5,coherence_top10,coherence,specialization\n";
  for (const auto& t : report.topics)
    out << "topic," << t.id << ',' << t.level << ',' << csv_number(t.coherence5) << ','
        << csv_number(t.coherence10) << ',' << csv_number(t.coherence) << ',' << csv_number(t.specialization)
        << '\n';
  for (const auto& e : report.edges)
    out << "edge," << e.parent << "->" << e.child << ",," << csv_number(e.coherence5) << ','
        << csv_number(e.coherence10) << ',' << csv_number(e.coherence) << ",\n";
  for (const auto& l : report.levels)
    out << "level," << l.level << ',' << l.level << ",,," << csv_number(l.mean_coherence) << ','
        << csv_number(l.mean_specialization) << '\n';
  out << "summary,all,,,," << csv_number(report.mean_coherence) << ',' << csv_number(report.mean_specialization)
      << '\n';
  out << "summary,hierarchical_coherence,,,," << csv_number(report.mean_hierarchical_coherence) << ",\n";
  out << "summary,child_affinity,,,," << csv_number(report.affinity.child) << ",\n";
  out << "summary,non_child_affinity,,,," << csv_number(report.affinity.non_child) << ",\n";
  return out.str();
}

}  // namespace hyhtm
