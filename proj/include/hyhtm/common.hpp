#ifndef HYHTM_COMMON_HPP_
#define HYHTM_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hyhtm {

using Index = Eigen::Index;

/// Row-major sparse storage is used for every document-indexed or term-indexed
/// matrix: rows are the unit of slicing throughout the pipeline.
template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int64_t>;

using SparseMatrix = SparseRows<double>;

enum class Space { hyperbolic, euclidean };

const char* to_string(Space space);
Space parse_space(const std::string& name);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// User-supplied configuration is invalid or unreadable.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition or internal invariant was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

namespace log {
enum class Level { debug = 0, info = 1, warning = 2, silent = 3 };
void set_level(Level level);
Level level();
void info(const std::string& message);
void warning(const std::string& message);
}  // namespace log

}  // namespace hyhtm

#endif  // HYHTM_COMMON_HPP_
