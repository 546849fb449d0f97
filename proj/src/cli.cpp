#include "hyhtm/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hyhtm/corpus.hpp"
#include "hyhtm/hierarchy.hpp"
#include "hyhtm/hypspace.hpp"
#include "hyhtm/metrics.hpp"
#include "hyhtm/serialization.hpp"
#include "hyhtm/tree_io.hpp"

namespace hyhtm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class DegenerateCorpus : public Error {
 public:
  using Error::Error;
};

/// Flat JSON config file with keys named like the command-line flags; a flag
/// given on the command line wins over the file.
class Settings {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": not found");
    try {
      file_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!file_.is_object()) throw ConfigError(path + ": expected a JSON object");
  }

  template <typename T>
  T get(const std::optional<T>& flag, const std::string& key, T fallback) const {
    if (flag) return *flag;
    if (file_.contains(key)) {
      try {
        return file_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    }
    return fallback;
  }

 private:
  json file_ = json::object();
};

struct PreprocessFlags {
  std::optional<std::string> input, output;
  std::optional<int> min_doc_freq, min_token_length;
  std::optional<bool> stem, ratio_filter, no_default_stopwords;
  std::optional<double> ratio_threshold;
  std::vector<std::string> stopwords;
};

struct TrainFlags {
  std::optional<std::string> corpus, embeddings, output, cache_dir, space, reweight;
  std::optional<double> alpha, nmf_tol;
  std::optional<Index> k_s, k_h, n_topics, min_docs, kept_terms;
  std::optional<int> max_depth, nmf_max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<bool> dump_factors, center_max, no_cache;
};

fs::path corpus_file(const fs::path& path) { return fs::is_directory(path) ? path / "corpus.bin" : path; }

std::string format_real(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

int cmd_preprocess(const Settings& s, const PreprocessFlags& f) {
  const std::string input = s.get(f.input, "input", std::string());
  if (input.empty()) throw ConfigError("preprocess: --input is required");
  const fs::path output = s.get(f.output, "output", std::string("."));

  PreprocessConfig config;
  config.min_doc_freq = s.get(f.min_doc_freq, "min_doc_freq", config.min_doc_freq);
  config.min_token_length = s.get(f.min_token_length, "min_token_length", config.min_token_length);
  config.stem = s.get(f.stem, "stem", config.stem);
  config.ratio_filter_enabled = s.get(f.ratio_filter, "ratio_filter", config.ratio_filter_enabled);
  config.ratio_threshold = s.get(f.ratio_threshold, "ratio_threshold", config.ratio_threshold);
  config.use_bundled_stopwords = !s.get(f.no_default_stopwords, "no_default_stopwords", false);
  for (const auto& p : f.stopwords) config.stopword_lists.emplace_back(p);
  config.validate();

  const Corpus corpus = preprocess(read_raw_documents(input), config);
  fs::create_directories(output);
  write_corpus(corpus, output / "corpus.bin");
  std::string vocab_txt;
  for (const auto& term : corpus.vocabulary.terms()) vocab_txt += term + '\n';
  write_text(output / "vocab.txt", vocab_txt);

  std::size_t tokens = 0;
  for (const auto& doc : corpus.documents) tokens += doc.tokens.size();
  std::cout << "docs=" << corpus.num_documents() << " vocab=" << corpus.vocabulary.size()
            << " avg_len=" << format_real(static_cast<double>(tokens) / static_cast<double>(corpus.num_documents()))
            << '\n';
  return kSuccess;
}

// Loads a cached sparse matrix or builds and stores it.
template <typename Build>
SparseMatrix cached(const std::optional<fs::path>& dir, const std::string& name, const std::string& key, Build build,
                    json& log) {
  if (dir) {
    const fs::path file = *dir / (name + "-" + key.substr(0, 32) + ".bin");
    if (fs::exists(file)) {
      log[name] = {{"key", key}, {"hit", true}};
      return read_sparse_triplets(file);
    }
    SparseMatrix m = build();
    fs::create_directories(*dir);
    write_sparse_triplets(m, file);
    log[name] = {{"key", key}, {"hit", false}};
    return m;
  }
  log[name] = {{"key", key}, {"hit", false}};
  return build();
}

int cmd_train(const Settings& s, const TrainFlags& f) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  json timings = json::object();
  auto lap = [&](const char* stage, Clock::time_point since) {
    timings[stage] = std::chrono::duration<double>(Clock::now() - since).count();
  };

  const std::string corpus_arg = s.get(f.corpus, "corpus", std::string());
  const std::string embeddings_arg = s.get(f.embeddings, "embeddings", std::string());
  if (corpus_arg.empty() || embeddings_arg.empty()) throw ConfigError("train: --corpus and --embeddings are required");
  const fs::path output = s.get(f.output, "output", std::string("model"));

  TrainConfig config;
  config.space = parse_space(s.get(f.space, "space", std::string("hyperbolic")));
  config.reweight = parse_reweight_mode(s.get(f.reweight, "reweight", std::string("hierarchy")));
  config.alpha = s.get(f.alpha, "alpha", config.alpha);
  config.k_s = s.get(f.k_s, "k_s", config.k_s);
  config.k_h = s.get(f.k_h, "k_h", config.k_h);
  config.n_topics_per_node = s.get(f.n_topics, "n_topics", config.n_topics_per_node);
  config.max_depth = s.get(f.max_depth, "max_depth", config.max_depth);
  config.min_docs = s.get(f.min_docs, "min_docs", config.min_docs);
  config.seed = s.get(f.seed, "seed", config.seed);
  config.nmf_max_iter = s.get(f.nmf_max_iter, "nmf_max_iter", config.nmf_max_iter);
  config.nmf_tol = s.get(f.nmf_tol, "nmf_tol", config.nmf_tol);
  config.kept_terms = s.get(f.kept_terms, "kept_terms", config.kept_terms);
  const bool center_max = s.get(f.center_max, "center_max", false);
  const bool dump_factors = s.get(f.dump_factors, "dump_factors", false);
  config.validate();

  std::optional<fs::path> cache_dir;
  if (!s.get(f.no_cache, "no_cache", false)) {
    std::string dir = s.get(std::optional<std::string>{}, "cache_dir", (output / "cache").string());
    if (const char* env = std::getenv("HYHTM_CACHE_DIR"); env && *env) dir = env;
    if (f.cache_dir) dir = *f.cache_dir;
    cache_dir = dir;
  }

  auto t = Clock::now();
  const fs::path corpus_path = corpus_file(corpus_arg);
  const Corpus corpus = read_corpus(corpus_path);
  const std::string corpus_hash = file_sha256(corpus_path);
  const std::string embeddings_hash = file_sha256(embeddings_arg);
  const EmbeddingTable table = load_embeddings(embeddings_arg, corpus.vocabulary, config.space);
  if (table.covered.empty()) throw ShapeError("embeddings cover none of the vocabulary terms");
  lap("load", t);

  t = Clock::now();
  json cache_log = json::object();
  const std::string base_key = ContentHasher()
                                   .update(corpus_hash)
                                   .update(embeddings_hash)
                                   .update(std::string(to_string(config.space)))
                                   .hex_digest();
  const std::string ms_key = ContentHasher()
                                 .update(base_key)
                                 .update(static_cast<std::int64_t>(config.k_s))
                                 .update(config.alpha)
                                 .update(static_cast<std::int64_t>(center_max))
                                 .hex_digest();
  const std::string mh_key = ContentHasher().update(base_key).update(static_cast<std::int64_t>(config.k_h)).hex_digest();
  const std::string a0_key = ContentHasher().update(ms_key).update(std::string("a0")).hex_digest();

  TermSimilarityMatrix ms;
  ms.alpha = config.alpha;
  ms.k_s = config.k_s;
  ms.entries = cached(cache_dir, "ms", ms_key, [&] {
    return build_similarity_matrix(table, config.k_s, config.alpha,
                                   center_max ? MaxDistanceMode::center_max : MaxDistanceMode::all_pairs)
        .entries;
  }, cache_log);
  TermHierarchyMatrix mh;
  mh.k_h = config.k_h;
  mh.entries = cached(cache_dir, "mh", mh_key, [&] { return build_hierarchy_matrix(table, config.k_h).entries; },
                      cache_log);
  const TermFrequencyMatrix tf = build_tf(corpus);
  DocTermRepresentation a0;
  a0.doc_ids = corpus.doc_ids();
  a0.values = cached(cache_dir, "a0", a0_key, [&] {
    return build_document_representation(tf, ms, compute_idf(tf, ms)).values;
  }, cache_log);
  lap("matrices", t);

  t = Clock::now();
  fs::create_directories(output);
  FactorizationHook hook;
  if (dump_factors) {
    fs::create_directories(output / "factors");
    hook = [&](const std::string& path, int level, const FactorPair& factors) {
      const fs::path base = output / "factors" / ("level" + std::to_string(level) + "-node" +
                                                  (path.empty() ? std::string("root") : path));
      write_dense(factors.W, base.string() + "-W.bin");
      write_dense(factors.H, base.string() + "-H.bin");
    };
  }
  const TopicTree tree = build_hierarchy(a0, mh, config, hook);
  lap("hierarchy", t);
  timings["total"] = std::chrono::duration<double>(Clock::now() - t_start).count();

  write_tree(tree, corpus.vocabulary, output / "tree.json");
  json provenance = {{"seed", config.seed},
                     {"space", to_string(config.space)},
                     {"ablation", config.space == Space::euclidean ? "euclidean-embeddings" : "none"},
                     {"hyperparameters", config_to_json(config)},
                     {"center_max", center_max},
                     {"inputs",
                      {{"corpus", {{"path", corpus_path.string()}, {"sha256", corpus_hash}}},
                       {"embeddings", {{"path", embeddings_arg}, {"sha256", embeddings_hash}}}}},
                     {"embedding_coverage", table.coverage()},
                     {"tree_sha256", file_sha256(output / "tree.json")},
                     {"cache", cache_log},
                     {"timings_seconds", timings},
                     {"peak_live_representations", tree.diagnostics.peak_live_representations},
                     {"factorizations", tree.diagnostics.factorizations},
                     {"unassigned_documents", tree.diagnostics.unassigned_documents},
                     {"nodes", tree.node_count()},
                     {"depth", tree.depth()}};
  write_text(output / "provenance.json", provenance.dump(2) + "\n");

  if (tree.empty()) throw DegenerateCorpus(tree.diagnostics.message);
  std::cout << "nodes=" << tree.node_count() << " roots=" << tree.roots.size() << " depth=" << tree.depth()
            << " peak_live=" << tree.diagnostics.peak_live_representations << '\n';
  return kSuccess;
}

int cmd_evaluate(const std::string& model_dir, const std::string& corpus_arg, const std::string& output_arg) {
  const Corpus corpus = read_corpus(corpus_file(corpus_arg));
  const fs::path model(model_dir);
  if (!fs::exists(model / "tree.json")) throw ConfigError((model / "tree.json").string() + ": not found");
  const LoadedTree loaded = read_tree(model / "tree.json", &corpus.vocabulary);
  const EvalReport report = evaluate(loaded.tree, corpus);

  const fs::path output = output_arg.empty() ? model : fs::path(output_arg);
  fs::create_directories(output);
  write_text(output / "report.json", report_to_json(report).dump(2) + "\n");
  write_text(output / "report.csv", report_to_csv(report));
  auto show = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("absent"); };
  std::cout << "coherence=" << show(report.mean_coherence)
            << " hierarchical_coherence=" << show(report.mean_hierarchical_coherence)
            << " specialization=" << show(report.mean_specialization) << '\n';
  return kSuccess;
}

int cmd_export(const std::string& model_dir, const std::string& format, std::optional<Index> top_k,
               const std::string& output_arg) {
  if (format != "json" && format != "dot") throw ConfigError("unknown export format '" + format + "'");
  const fs::path model(model_dir);
  if (!fs::exists(model / "tree.json")) throw ConfigError((model / "tree.json").string() + ": not found");
  const LoadedTree loaded = read_tree(model / "tree.json");
  fs::path output = output_arg;
  if (output.empty()) output = model / (format == "dot" ? "tree.dot" : "tree.export.json");
  if (format == "dot")
    write_text(output, tree_to_dot(loaded.tree, loaded.vocabulary, top_k.value_or(10)));
  else
    write_text(output, tree_to_json(loaded.tree, loaded.vocabulary, top_k.value_or(0)).dump(2) + "\n");
  std::cout << output.string() << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Hierarchical topic modeling with hyperbolic word embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON file with flat keys named like the flags");
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  PreprocessFlags pf;
  auto* pre = app.add_subcommand("preprocess", "Tokenize a raw corpus into corpus.bin and vocab.txt");
  pre->add_option("--input,--corpus", pf.input, "JSONL ({\"id\",\"text\"}) or one document per line");
  pre->add_option("--output", pf.output, "Output directory");
  pre->add_option("--min_doc_freq,--min-doc-freq", pf.min_doc_freq);
  pre->add_option("--min_token_length,--min-token-length", pf.min_token_length);
  pre->add_flag_callback("--stem", [&] { pf.stem = true; }, "Strip plural suffixes");
  pre->add_flag_callback("--ratio_filter,--ratio-filter", [&] { pf.ratio_filter = true; });
  pre->add_option("--ratio_threshold,--ratio-threshold", pf.ratio_threshold);
  pre->add_flag_callback("--no_default_stopwords,--no-default-stopwords", [&] { pf.no_default_stopwords = true; });
  pre->add_option("--stopwords", pf.stopwords, "Additional stopword files");

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Build the topic tree");
  train->add_option("--corpus", tf.corpus, "corpus.bin or the directory holding it");
  train->add_option("--embeddings", tf.embeddings, "Word vectors, one term per line");
  train->add_option("--output", tf.output, "Model directory");
  train->add_option("--cache_dir,--cache-dir", tf.cache_dir);
  train->add_option("--space", tf.space, "hyperbolic or euclidean");
  train->add_option("--reweight", tf.reweight, "hierarchy, identity or uniform");
  train->add_option("--alpha", tf.alpha);
  train->add_option("--k_s,--k-s", tf.k_s);
  train->add_option("--k_h,--k-h", tf.k_h);
  train->add_option("--n_topics,--n-topics", tf.n_topics);
  train->add_option("--max_depth,--max-depth", tf.max_depth);
  train->add_option("--min_docs,--min-docs", tf.min_docs);
  train->add_option("--seed", tf.seed);
  train->add_option("--nmf_max_iter,--nmf-max-iter", tf.nmf_max_iter);
  train->add_option("--nmf_tol,--nmf-tol", tf.nmf_tol);
  train->add_option("--kept_terms,--kept-terms", tf.kept_terms);
  train->add_flag_callback("--dump_factors,--dump-factors", [&] { tf.dump_factors = true; });
  train->add_flag_callback("--center_max,--center-max", [&] { tf.center_max = true; });
  train->add_flag_callback("--no_cache,--no-cache", [&] { tf.no_cache = true; });

  std::string eval_model, eval_corpus, eval_output;
  auto* eval = app.add_subcommand("evaluate", "Score a trained tree against its corpus");
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--corpus", eval_corpus)->required();
  eval->add_option("--output", eval_output);

  std::string export_model, export_format = "json", export_output;
  std::optional<Index> export_top_k;
  auto* exp = app.add_subcommand("export", "Render a tree as JSON or Graphviz DOT");
  exp->add_option("--model", export_model)->required();
  exp->add_option("--format", export_format, "json or dot");
  exp->add_option("--top_k,--top-k", export_top_k);
  exp->add_option("--output", export_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  const auto previous_level = log::level();
  if (quiet) log::set_level(log::Level::silent);
  int code = kSuccess;
  try {
    Settings settings;
    settings.load(config_path);
    if (*pre) code = cmd_preprocess(settings, pf);
    else if (*train) code = cmd_train(settings, tf);
    else if (*eval) code = cmd_evaluate(eval_model, eval_corpus, eval_output);
    else if (*exp) code = cmd_export(export_model, export_format, export_top_k, export_output);
  } catch (const DegenerateCorpus& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kDegenerateCorpus;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kDataContractError;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kDataContractError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kInputError;
  }
  log::set_level(previous_level);
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace hyhtm::cli
