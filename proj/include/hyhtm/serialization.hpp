#ifndef HYHTM_SERIALIZATION_HPP_
#define HYHTM_SERIALIZATION_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "hyhtm/common.hpp"
#include "hyhtm/corpus.hpp"

namespace hyhtm {

/// Incremental SHA-256, hex-encoded.
class ContentHasher {
 public:
  ContentHasher();
  ~ContentHasher();
  ContentHasher(const ContentHasher&) = delete;
  ContentHasher& operator=(const ContentHasher&) = delete;

  ContentHasher& update(std::string_view bytes);
  ContentHasher& update(double value);
  ContentHasher& update(std::int64_t value);
  std::string hex_digest();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// corpus.bin: magic "HYHTMCRP", u32 version, then length-prefixed vocabulary
/// terms and documents (id, empty flag, u32 token indices), little-endian.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

/// Sparse triplet file: u32 rows, u32 cols, u64 nnz, then nnz records of
/// (u32 row, u32 col, f64 value), all little-endian, in row-major order.
void write_sparse_triplets(const SparseMatrix& matrix, const std::filesystem::path& path);
SparseMatrix read_sparse_triplets(const std::filesystem::path& path);

/// Dense dump: u32 rows, u32 cols, then rows*cols f64 in row-major order.
void write_dense(const Eigen::MatrixXd& matrix, const std::filesystem::path& path);
Eigen::MatrixXd read_dense(const std::filesystem::path& path);

}  // namespace hyhtm

#endif  // HYHTM_SERIALIZATION_HPP_
