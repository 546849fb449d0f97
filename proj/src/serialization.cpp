#include "hyhtm/serialization.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace hyhtm {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

struct ContentHasher::State {
  EVP_MD_CTX* ctx = nullptr;
};

ContentHasher::ContentHasher() : state_(std::make_unique<State>()) {
  state_->ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr);
}

ContentHasher::~ContentHasher() { EVP_MD_CTX_free(state_->ctx); }

ContentHasher& ContentHasher::update(std::string_view bytes) {
  EVP_DigestUpdate(state_->ctx, bytes.data(), bytes.size());
  return *this;
}

ContentHasher& ContentHasher::update(double value) {
  return update(std::string_view(reinterpret_cast<const char*>(&value), sizeof value));
}

ContentHasher& ContentHasher::update(std::int64_t value) {
  return update(std::string_view(reinterpret_cast<const char*>(&value), sizeof value));
}

std::string ContentHasher::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(state_->ctx, digest.data(), &len);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr);
  return out.str();
}

std::string sha256_hex(std::string_view bytes) { return ContentHasher().update(bytes).hex_digest(); }

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": not found");
  ContentHasher hasher;
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    hasher.update(std::string_view(buffer.data(), static_cast<std::size_t>(in.gcount())));
  }
  return hasher.hex_digest();
}

namespace {

constexpr char kCorpusMagic[8] = {'H', 'Y', 'H', 'T', 'M', 'C', 'R', 'P'};
constexpr std::uint32_t kCorpusVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ConfigError("cannot write " + path.string());
  }
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof value);
  }
  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  void finish() {
    out_.flush();
    if (!out_) throw Error("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": not found");
    if (!in_) throw ConfigError(path.string() + ": cannot be read");
  }
  template <typename T>
  T get() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in_) fail("truncated file");
    return value;
  }
  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  std::string string() { return bytes(get<std::uint32_t>()); }
  [[noreturn]] void fail(const std::string& what) const { throw ContractError(path_.string() + ": " + what); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  Writer w(path);
  w.bytes(std::string_view(kCorpusMagic, sizeof kCorpusMagic));
  w.put(kCorpusVersion);
  w.put(static_cast<std::uint64_t>(corpus.vocabulary.size()));
  for (const auto& term : corpus.vocabulary.terms()) w.string(term);
  w.put(static_cast<std::uint64_t>(corpus.documents.size()));
  for (const auto& doc : corpus.documents) {
    w.string(doc.id);
    w.put(static_cast<std::uint8_t>(doc.empty));
    w.put(static_cast<std::uint64_t>(doc.tokens.size()));
    for (Index t : doc.tokens) w.put(static_cast<std::uint32_t>(t));
  }
  w.finish();
}

Corpus read_corpus(const std::filesystem::path& path) {
  Reader r(path);
  if (r.bytes(sizeof kCorpusMagic) != std::string_view(kCorpusMagic, sizeof kCorpusMagic))
    r.fail("not a corpus file");
  if (r.get<std::uint32_t>() != kCorpusVersion) r.fail("unsupported corpus version");
  std::vector<std::string> terms(r.get<std::uint64_t>());
  for (auto& term : terms) term = r.string();
  Corpus corpus;
  corpus.vocabulary = Vocabulary::from_terms(terms);
  if (corpus.vocabulary.terms() != terms) r.fail("vocabulary is not sorted and unique");
  corpus.documents.resize(r.get<std::uint64_t>());
  for (auto& doc : corpus.documents) {
    doc.id = r.string();
    doc.empty = r.get<std::uint8_t>() != 0;
    doc.tokens.resize(r.get<std::uint64_t>());
    for (auto& t : doc.tokens) t = r.get<std::uint32_t>();
  }
  corpus.validate();
  return corpus;
}

void write_sparse_triplets(const SparseMatrix& matrix, const std::filesystem::path& path) {
  Writer w(path);
  w.put(static_cast<std::uint32_t>(matrix.rows()));
  w.put(static_cast<std::uint32_t>(matrix.cols()));
  w.put(static_cast<std::uint64_t>(matrix.nonZeros()));
  for (Index r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      w.put(static_cast<std::uint32_t>(it.row()));
      w.put(static_cast<std::uint32_t>(it.col()));
      w.put(static_cast<double>(it.value()));
    }
  w.finish();
}

SparseMatrix read_sparse_triplets(const std::filesystem::path& path) {
  Reader r(path);
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  const auto nnz = r.get<std::uint64_t>();
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const auto row = r.get<std::uint32_t>();
    const auto col = r.get<std::uint32_t>();
    const auto value = r.get<double>();
    if (row >= rows || col >= cols) r.fail("triplet index out of range");
    triplets.emplace_back(row, col, value);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_dense(const Eigen::MatrixXd& matrix, const std::filesystem::path& path) {
  Writer w(path);
  w.put(static_cast<std::uint32_t>(matrix.rows()));
  w.put(static_cast<std::uint32_t>(matrix.cols()));
  for (Index i = 0; i < matrix.rows(); ++i)
    for (Index j = 0; j < matrix.cols(); ++j) w.put(matrix(i, j));
  w.finish();
}

Eigen::MatrixXd read_dense(const std::filesystem::path& path) {
  Reader r(path);
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = r.get<double>();
  return m;
}

}  // namespace hyhtm
