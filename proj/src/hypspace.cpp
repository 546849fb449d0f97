#include "hyhtm/hypspace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hyhtm {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Monotone surrogate of the ranking distance, cheaper than the distance itself.
struct RankKey {
  const EmbeddingTable& table;
  Eigen::VectorXd sq_norms;
  Eigen::VectorXd norms;

  explicit RankKey(const EmbeddingTable& t) : table(t) {
    sq_norms = t.vectors.rowwise().squaredNorm();
    norms = sq_norms.cwiseSqrt();
  }

  double operator()(Index a, Index b) const {
    if (table.space == Space::hyperbolic) {
      const double diff = (table.vectors.row(a) - table.vectors.row(b)).squaredNorm();
      return diff / ((1.0 - sq_norms[a]) * (1.0 - sq_norms[b]));
    }
    if (norms[a] == 0 || norms[b] == 0) return 1.0;
    const double c = table.vectors.row(a).dot(table.vectors.row(b)) / (norms[a] * norms[b]);
    return 1.0 - std::clamp(c, -1.0, 1.0);
  }
};

Neighborhood knn_with(const EmbeddingTable& table, const RankKey& key, Index term, Index k) {
  if (!table.contains(term)) throw ContractError("knn center term " + std::to_string(term) + " is not covered");
  if (k < 1) throw ConfigError("neighborhood size must be >= 1");

  std::vector<std::pair<double, Index>> candidates;
  candidates.reserve(table.covered.size());
  for (Index other : table.covered)
    if (other != term) candidates.emplace_back(key(term, other), other);

  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k - 1), candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());

  Neighborhood nbhd;
  nbhd.center = term;
  nbhd.members.reserve(take + 1);
  nbhd.members.emplace_back(term, 0.0);
  for (std::size_t i = 0; i < take; ++i)
    nbhd.members.emplace_back(candidates[i].second, table.distance(term, candidates[i].second));
  return nbhd;
}

SparseMatrix assemble_rows(Index m, const std::vector<std::vector<std::pair<Index, double>>>& rows) {
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  for (Index r = 0; r < m; ++r)
    for (const auto& [c, v] : rows[static_cast<std::size_t>(r)]) triplets.emplace_back(r, c, v);
  SparseMatrix out(m, m);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace

double EmbeddingTable::distance(Index a, Index b) const {
  if (space == Space::hyperbolic) return poincare_distance(vectors.row(a), vectors.row(b));
  return 1.0 - euclidean_cosine(vectors.row(a), vectors.row(b));
}

EmbeddingTable make_embedding_table(Eigen::MatrixXd vectors, std::vector<bool> is_covered, Space space) {
  if (static_cast<Index>(is_covered.size()) != vectors.rows())
    throw ShapeError("coverage mask does not match embedding rows");
  EmbeddingTable table;
  table.space = space;
  table.dim = vectors.cols();
  table.vectors = std::move(vectors);
  table.is_covered = std::move(is_covered);
  for (Index i = 0; i < table.vectors.rows(); ++i) {
    if (!table.is_covered[static_cast<std::size_t>(i)]) {
      table.vectors.row(i).setZero();
      continue;
    }
    table.covered.push_back(i);
    if (space == Space::hyperbolic) {
      const double norm = table.vectors.row(i).norm();
      if (norm >= 1.0) {
        table.vectors.row(i) *= kBallProjectionRadius / norm;
        ++table.projected;
      }
    }
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, Space space) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": not found");
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot be read");

  Index dim = 0;
  Eigen::MatrixXd vectors;
  std::vector<bool> is_covered(static_cast<std::size_t>(vocab.size()), false);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      long count = 0, header_dim = 0;
      if (parse_number(fields[0], count) && parse_number(fields[1], header_dim)) {
        if (header_dim < 1) throw ParseError(path.string(), line_no, "invalid dimension in header");
        dim = header_dim;
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(path.string(), line_no, "expected a term followed by its vector");
    const Index line_dim = static_cast<Index>(fields.size()) - 1;
    if (dim == 0) dim = line_dim;
    if (line_dim != dim)
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(dim) + " values, found " + std::to_string(line_dim));
    if (vectors.size() == 0) vectors = Eigen::MatrixXd::Zero(vocab.size(), dim);

    auto idx = vocab.find(fields[0]);
    Eigen::VectorXd v(dim);
    for (Index j = 0; j < dim; ++j) {
      if (!parse_number(fields[static_cast<std::size_t>(j) + 1], v[j]) || !std::isfinite(v[j]))
        throw ParseError(path.string(), line_no, "malformed number '" +
                                                     std::string(fields[static_cast<std::size_t>(j) + 1]) + "'");
    }
    if (!idx || is_covered[static_cast<std::size_t>(*idx)]) continue;
    vectors.row(*idx) = v.transpose();
    is_covered[static_cast<std::size_t>(*idx)] = true;
  }
  if (vectors.size() == 0) vectors = Eigen::MatrixXd::Zero(vocab.size(), std::max<Index>(dim, 1));

  auto table = make_embedding_table(std::move(vectors), std::move(is_covered), space);
  std::ostringstream msg;
  msg << "embeddings cover " << table.covered.size() << "/" << vocab.size() << " terms ("
      << 100.0 * table.coverage() << "%)";
  if (table.projected > 0) msg << ", " << table.projected << " projected into the ball";
  log::info(msg.str());
  if (table.coverage() < 0.1) log::warning("embedding coverage below 10% of the vocabulary");
  return table;
}

Neighborhood knn(const EmbeddingTable& table, Index term, Index k) {
  return knn_with(table, RankKey(table), term, k);
}

std::vector<std::pair<Index, double>> neighborhood_similarity(const Neighborhood& nbhd,
                                                              const EmbeddingTable& table,
                                                              MaxDistanceMode mode) {
  std::vector<std::pair<Index, double>> out;
  out.reserve(nbhd.members.size());
  if (table.space == Space::euclidean) {
    for (const auto& [term, dist] : nbhd.members) {
      const double s = term == nbhd.center
                           ? 1.0
                           : std::max(0.0, euclidean_cosine(table.vectors.row(nbhd.center), table.vectors.row(term)));
      out.emplace_back(term, s);
    }
    return out;
  }

  double max_dist = 0;
  const auto& members = nbhd.members;
  if (mode == MaxDistanceMode::all_pairs) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        max_dist = std::max(max_dist, table.distance(members[a].first, members[b].first));
  } else {
    for (const auto& member : members) max_dist = std::max(max_dist, table.distance(nbhd.center, member.first));
  }

  for (const auto& [term, dist] : members) {
    double s = 1.0;
    if (max_dist > 0 && term != nbhd.center)
      s = std::clamp(1.0 - table.distance(nbhd.center, term) / max_dist, 0.0, 1.0);
    out.emplace_back(term, s);
  }
  return out;
}

TermSimilarityMatrix build_similarity_matrix(const EmbeddingTable& table, Index k_s, double alpha,
                                             MaxDistanceMode mode) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (k_s < 1) throw ConfigError("k_s must be >= 1");
  const Index m = table.vocabulary_size();
  const RankKey key(table);
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(m));

#pragma omp parallel for schedule(dynamic, 16)
  for (Index w = 0; w < m; ++w) {
    auto& row = rows[static_cast<std::size_t>(w)];
    if (!table.contains(w)) {
      row.emplace_back(w, 1.0);
      continue;
    }
    for (const auto& [term, s] : neighborhood_similarity(knn_with(table, key, w, k_s), table, mode)) {
      if (term == w)
        row.emplace_back(w, 1.0);
      else if (s >= alpha && s > 0)
        row.emplace_back(term, s);
    }
  }
  return {assemble_rows(m, rows), alpha, k_s};
}

TermHierarchyMatrix build_hierarchy_matrix(const EmbeddingTable& table, Index k_h) {
  if (k_h < 1) throw ConfigError("k_h must be >= 1");
  const Index m = table.vocabulary_size();
  const RankKey key(table);
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(m));

#pragma omp parallel for schedule(dynamic, 16)
  for (Index w = 0; w < m; ++w) {
    auto& row = rows[static_cast<std::size_t>(w)];
    if (!table.contains(w)) {
      row.emplace_back(w, 1.0);
      continue;
    }
    for (const auto& member : knn_with(table, key, w, k_h).members) row.emplace_back(member.first, 1.0);
  }
  return {assemble_rows(m, rows), k_h};
}

}  // namespace hyhtm
