// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hyhtm/cli.hpp"
#include "hyhtm/corpus.hpp"
#include "hyhtm/hierarchy.hpp"
#include "hyhtm/hypspace.hpp"
#include "hyhtm/metrics.hpp"
#include "hyhtm/nmf.hpp"
#include "planted.hpp"

using namespace hyhtm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Wide = boost::multiprecision::cpp_bin_float_50;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

Eigen::VectorXd ball_point(std::mt19937_64& rng, Index dim, double max_radius) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  return v.normalized() * (max_radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim)));
}

double wide_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Wide du = 0, nu = 0, nv = 0;
  for (Index i = 0; i < u.size(); ++i) {
    const Wide a = u[i], b = v[i];
    du += (a - b) * (a - b);
    nu += a * a;
    nv += b * b;
  }
  return static_cast<double>(boost::multiprecision::acosh(1 + 2 * du / ((1 - nu) * (1 - nv))));
}

void distance_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst_rel = 0, worst_sym = 0, worst_tri = -1e300;
  for (int i = 0; i < 1000; ++i) {
    const Index dim = 2 + i % 49;
    const auto u = ball_point(rng, dim, 0.999);
    const auto v = ball_point(rng, dim, 0.999);
    const double ref = wide_distance(u, v);
    const double got = poincare_distance(u, v);
    if (ref > 0) worst_rel = std::max(worst_rel, std::abs(got - ref) / ref);
    worst_sym = std::max(worst_sym, std::abs(got - poincare_distance(v, u)));
  }
  for (int i = 0; i < 1000; ++i) {
    const Index dim = 2 + i % 9;
    const auto a = ball_point(rng, dim, 0.999), b = ball_point(rng, dim, 0.999), c = ball_point(rng, dim, 0.999);
    worst_tri = std::max(worst_tri, poincare_distance(a, c) - poincare_distance(a, b) - poincare_distance(b, c));
  }
  const double elapsed = seconds_since(start);
  report(1, worst_rel < 1e-9 && worst_sym < 1e-12 && worst_tri <= 1e-9 && elapsed < 5.0,
         fmt("distance oracle: max rel err %.3g (< 1e-9), max asymmetry %.3g (< 1e-12), max triangle excess %.3g "
             "(<= 1e-9), %.2fs (< 5s)",
             worst_rel, worst_sym, worst_tri, elapsed));
}

void identity_reduction() {
  std::mt19937_64 rng(202);
  std::vector<std::string> names;
  for (int t = 0; t < 60; ++t) names.push_back("term" + std::string(1, static_cast<char>('a' + t % 26)) + std::to_string(t));
  Corpus corpus;
  corpus.vocabulary = Vocabulary::from_terms(names);
  const Index m = corpus.vocabulary.size();
  std::geometric_distribution<int> len(0.05);
  for (int d = 0; d < 100; ++d) {
    Document doc{"doc" + std::to_string(d), {}, false};
    const int n = 1 + len(rng);
    for (int i = 0; i < n; ++i) doc.tokens.push_back(static_cast<Index>(rng() % static_cast<std::uint64_t>(m)));
    corpus.documents.push_back(doc);
  }

  const TermSimilarityMatrix ms{sparse_identity(m), 1.0, 1};
  const auto tf = build_tf(corpus);
  const Eigen::MatrixXd a = build_document_representation(tf, ms, compute_idf(tf, ms)).values;

  // Classic TF-IDF straight from the token lists.
  std::vector<int> df(static_cast<std::size_t>(m), 0);
  for (const auto& doc : corpus.documents)
    for (Index t : std::set<Index>(doc.tokens.begin(), doc.tokens.end())) ++df[static_cast<std::size_t>(t)];
  double worst = 0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    std::map<Index, int> counts;
    for (Index t : corpus.documents[d].tokens) ++counts[t];
    for (Index t = 0; t < m; ++t) {
      const int c = counts.count(t) ? counts[t] : 0;
      const double idf = df[static_cast<std::size_t>(t)] ? std::log(100.0 / df[static_cast<std::size_t>(t)]) : 0.0;
      worst = std::max(worst, std::abs(a(static_cast<Index>(d), t) - c * idf));
    }
  }
  report(2, worst < 1e-9, fmt("identity similarity reproduces TF-IDF on 100 docs: max abs diff %.3g (< 1e-9)", worst));
}

void neighborhood_oracle() {
  std::mt19937_64 rng(303);
  bool exact = true, in_range = true;
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index dim = 2 + trial % 5;
    Eigen::MatrixXd pts(10, dim);
    for (Index i = 0; i < 10; ++i) pts.row(i) = ball_point(rng, dim, 0.95).transpose();
    const auto table = make_embedding_table(pts, std::vector<bool>(10, true), Space::hyperbolic);
    const Index center = trial % 10;
    const auto nbhd = knn(table, center, 10);
    const auto sims = neighborhood_similarity(nbhd, table);

    double max_d = 0;
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 10; ++j)
        if (i != j) max_d = std::max(max_d, poincare_distance(pts.row(i), pts.row(j)));
    for (const auto& [term, s] : sims) {
      const double ref = term == center ? 1.0 : 1.0 - poincare_distance(pts.row(center), pts.row(term)) / max_d;
      exact = exact && s == ref;
      in_range = in_range && s >= 0.0 && s <= 1.0;
      ++checked;
    }
  }
  report(3, exact && in_range && checked == 500,
         fmt("neighborhood similarity equals brute-force pairwise-max reference on 50 neighborhoods (%d values, "
             "exact=%s, within [0,1]=%s)",
             checked, exact ? "yes" : "no", in_range ? "yes" : "no"));
}

void nmf_monotonicity() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> rows(5, 200), cols(5, 500), topics(1, 10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_increase = -1e300;
  int matrices = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = trial == 0 ? 200 : rows(rng), m = trial == 0 ? 500 : cols(rng);
    const double density = 0.05 + 0.5 * unif(rng);
    Eigen::MatrixXd a(n, m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) a(i, j) = unif(rng) < density ? unif(rng) : 0.0;
    NmfConfig config;
    config.n_topics = topics(rng);
    config.seed = static_cast<std::uint64_t>(trial);
    config.max_iter = 200;
    config.tol = 1e-12;
    config.init = trial % 5 == 4 ? NmfInit::nndsvd : NmfInit::random_uniform;
    double previous = std::numeric_limits<double>::infinity();
    config.on_iteration = [&](int, const Eigen::MatrixXd& w, const Eigen::MatrixXd& h, double) {
      const double exact = 0.5 * (a - w * h).squaredNorm();
      worst_increase = std::max(worst_increase, exact - previous);
      previous = exact;
    };
    if (trial % 2)
      factorize(SparseMatrix(a.sparseView()), config);
    else
      factorize(a, config);
    ++matrices;
  }

  double worst_rank1 = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 60), m = 2 + static_cast<Index>(rng() % 120);
    Eigen::VectorXd u(n), v(m);
    for (Index i = 0; i < n; ++i) u[i] = unif(rng);
    for (Index j = 0; j < m; ++j) v[j] = unif(rng) < 0.3 ? 0.0 : unif(rng);
    v[0] = 1.0;
    const Eigen::MatrixXd a = u * v.transpose();
    NmfConfig config;
    config.n_topics = 1;
    config.seed = static_cast<std::uint64_t>(trial);
    config.max_iter = 2000;
    config.tol = 1e-14;
    const auto f = factorize(a, config);
    worst_rank1 = std::max(worst_rank1, reconstruction_error(a, f.W, f.H) / a.norm());
  }
  report(4, worst_increase <= 1e-10 && worst_rank1 < 1e-4,
         fmt("NMF objective non-increasing on %d matrices up to 200x500 (largest step increase %.3g, <= 1e-10); "
             "rank-1 relative error %.3g (< 1e-4)",
             matrices, worst_increase, worst_rank1));
}

void metric_oracles() {
  Corpus corpus;
  corpus.vocabulary = Vocabulary::from_terms({"a", "b", "c"});
  corpus.documents = {{"1", {0, 1}, false}, {"2", {0, 1}, false}, {"3", {0, 2}, false}, {"4", {2}, false}};
  const auto stats = build_stats(corpus, {0, 1, 2});
  const double ln43 = std::log(4.0 / 3.0);
  const double coh = *coherence({0, 1}, stats, 2);
  const double hcoh = *hierarchical_coherence({0}, {1}, stats, 1);
  Eigen::VectorXd corpus_vec(3), disjoint(3);
  corpus_vec << 1, 2, 0;
  disjoint << 0, 0, 5;
  const double proportional = *topic_specialization(3.5 * corpus_vec, corpus_vec);
  const double orthogonal = *topic_specialization(disjoint, corpus_vec);
  const bool ok = std::abs(coh - ln43) <= 1e-12 && std::abs(hcoh - ln43) <= 1e-12 && proportional == 0.0 &&
                  orthogonal == 1.0;
  report(5, ok,
         fmt("4-document metric oracles: coherence{a,b} - ln(4/3) = %.3g, hierarchical({a},{b}) - ln(4/3) = %.3g "
             "(both within 1e-12); specialization proportional=%g disjoint=%g",
             coh - ln43, hcoh - ln43, proportional, orthogonal));
}

struct PlantedRun {
  double purity = 0;
  double hcoh_full = 0, hcoh_identity = 0;
  double spec1 = 0, spec2 = 0;
  int peak = 0;
};

PlantedRun planted_run(std::uint64_t seed) {
  testing::PlantedConfig pc;
  pc.seed = seed;
  const auto fx = testing::make_planted(pc);
  TrainConfig config;
  config.n_topics_per_node = 3;
  config.max_depth = 2;
  config.min_docs = 50;
  config.k_s = config.k_h = 20;
  config.alpha = 0.1;
  config.seed = seed;

  const auto ms = build_similarity_matrix(fx.table, config.k_s, config.alpha);
  const auto mh = build_hierarchy_matrix(fx.table, config.k_h);
  const auto tf = build_tf(fx.corpus);
  const auto a0 = build_document_representation(tf, ms, compute_idf(tf, ms), fx.corpus.doc_ids());

  PlantedRun run;
  const auto full = build_hierarchy(a0, mh, config);
  std::vector<std::vector<Index>> clusters;
  for (const auto& root : full.roots) clusters.push_back(root.doc_rows);
  run.purity = testing::purity(clusters, fx.root_label);
  const auto report = evaluate(full, fx.corpus);
  run.hcoh_full = report.mean_hierarchical_coherence.value_or(-1e300);
  for (const auto& level : report.levels) {
    if (level.level == 1) run.spec1 = level.mean_specialization.value_or(0);
    if (level.level == 2) run.spec2 = level.mean_specialization.value_or(0);
  }

  auto ablation = config;
  ablation.reweight = ReweightMode::identity;
  const auto identity = build_hierarchy(a0, mh, ablation);
  run.hcoh_identity = evaluate(identity, fx.corpus).mean_hierarchical_coherence.value_or(-1e300);
  run.peak = std::max(full.diagnostics.peak_live_representations, identity.diagnostics.peak_live_representations);
  return run;
}

void planted_hierarchy() {
  const auto start = Clock::now();
  std::vector<PlantedRun> runs;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) runs.push_back(planted_run(seed));
  const double elapsed = seconds_since(start);

  bool purity_ok = true, hcoh_ok = true;
  std::string purity_detail, hcoh_detail, spec_detail, peak_detail;
  int spec_wins = 0, worst_peak = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    purity_ok = purity_ok && r.purity >= 0.8;
    hcoh_ok = hcoh_ok && r.hcoh_full >= r.hcoh_identity;
    spec_wins += r.spec2 > r.spec1;
    worst_peak = std::max(worst_peak, r.peak);
    purity_detail += fmt("%s%.3f", i ? "/" : "", r.purity);
    hcoh_detail += fmt("%s%.4f vs %.4f", i ? ", " : "", r.hcoh_full, r.hcoh_identity);
    spec_detail += fmt("%s%.3f->%.3f", i ? ", " : "", r.spec1, r.spec2);
  }
  report(6, purity_ok && hcoh_ok && elapsed < 300.0,
         fmt("planted hierarchy, seeds 1-3: level-1 purity %s (>= 0.8); hierarchical coherence full vs identity "
             "ablation %s; %.1fs (< 300s)",
             purity_detail.c_str(), hcoh_detail.c_str(), elapsed));
  report(7, spec_wins >= 2,
         fmt("specialization level 1 -> level 2 per seed %s: increased in %d of 3 (>= 2)", spec_detail.c_str(),
             spec_wins));
  report(8, worst_peak <= 3,
         fmt("peak live representations across criterion-6 runs %d (<= max_depth + 1 = 3)", worst_peak));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism() {
  const auto dir = fs::temp_directory_path() / "hyhtm_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  testing::PlantedConfig pc;
  pc.seed = 1;
  const auto fx = testing::make_planted(pc);
  fx.write_jsonl(dir / "docs.jsonl");
  fx.write_embeddings(dir / "vectors.txt");

  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  int code = cli::run({"hyhtm", "preprocess", "--input", (dir / "docs.jsonl").string(), "--output", dir.string(),
                       "--min_doc_freq", "1", "-q"});
  for (const char* run : {"run1", "run2"}) {
    if (code != 0) break;
    code = cli::run({"hyhtm", "train", "--corpus", (dir / "corpus.bin").string(), "--embeddings",
                     (dir / "vectors.txt").string(), "--output", (dir / run).string(), "--n_topics", "3",
                     "--max_depth", "2", "--min_docs", "50", "--k_s", "20", "--k_h", "20", "--alpha", "0.1", "--seed",
                     "1", "--no_cache", "-q"});
  }
  std::cout.rdbuf(old);

  const auto a = slurp(dir / "run1" / "tree.json"), b = slurp(dir / "run2" / "tree.json");
  report(9, code == 0 && !a.empty() && a == b,
         fmt("two CLI training runs with seed 1 give byte-identical tree.json (%zu bytes, exit %d)", a.size(), code));
  fs::remove_all(dir);
}

}  // namespace

int main() {
  log::set_level(log::Level::warning);
  distance_oracle();
  identity_reduction();
  neighborhood_oracle();
  nmf_monotonicity();
  metric_oracles();
  planted_hierarchy();
  determinism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
