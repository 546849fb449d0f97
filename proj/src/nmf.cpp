#include "hyhtm/nmf.hpp"

#include <random>

namespace hyhtm {

namespace {

double sum_of(const SparseMatrix& a) { return a.sum(); }
double sum_of(const Eigen::MatrixXd& a) { return a.sum(); }

bool has_negative(const SparseMatrix& a) {
  for (Index i = 0; i < a.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a, i); it; ++it)
      if (!(it.value() >= 0)) return true;
  return false;
}
bool has_negative(const Eigen::MatrixXd& a) { return !(a.array() >= 0).all(); }

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }
const Eigen::MatrixXd& dense(const Eigen::MatrixXd& a) { return a; }

void random_init(Index rows, Index cols, double scale, std::mt19937_64& rng, Eigen::MatrixXd& out) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  out.resize(rows, cols);
  // Column-major fill keeps the draw order fixed for a given shape.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      double v = 0;
      while (v == 0) v = unif(rng);
      out(i, j) = v * scale;
    }
}

// Non-negative double SVD (Boutsidis & Gallopoulos); zeros are replaced by the
// mean of A so multiplicative updates can still move them.
void nndsvd_init(const Eigen::MatrixXd& a, Index k, Eigen::MatrixXd& w, Eigen::MatrixXd& h) {
  const Index n = a.rows(), m = a.cols();
  const double mean = a.mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  const Eigen::VectorXd& s = svd.singularValues();
  w = Eigen::MatrixXd::Zero(n, k);
  h = Eigen::MatrixXd::Zero(k, m);
  const Index rank = std::min<Index>(k, s.size());
  for (Index j = 0; j < rank; ++j) {
    Eigen::VectorXd x = u.col(j), y = v.col(j);
    if (j == 0) {
      w.col(0) = std::sqrt(s[0]) * x.cwiseAbs();
      h.row(0) = std::sqrt(s[0]) * y.cwiseAbs().transpose();
      continue;
    }
    Eigen::VectorXd xp = x.cwiseMax(0.0), xn = (-x).cwiseMax(0.0);
    Eigen::VectorXd yp = y.cwiseMax(0.0), yn = (-y).cwiseMax(0.0);
    const double mp = xp.norm() * yp.norm();
    const double mn = xn.norm() * yn.norm();
    Eigen::VectorXd uu, vv;
    double sigma;
    if (mp >= mn) {
      uu = xp / std::max(xp.norm(), 1e-300);
      vv = yp / std::max(yp.norm(), 1e-300);
      sigma = mp;
    } else {
      uu = xn / std::max(xn.norm(), 1e-300);
      vv = yn / std::max(yn.norm(), 1e-300);
      sigma = mn;
    }
    w.col(j) = std::sqrt(s[j] * sigma) * uu;
    h.row(j) = std::sqrt(s[j] * sigma) * vv.transpose();
  }
  const double fill = mean > 0 ? mean : 1e-6;
  w = (w.array() == 0).select(fill, w);
  h = (h.array() == 0).select(fill, h);
}

template <typename Matrix>
FactorPair factorize_impl(const Matrix& a, const NmfConfig& config) {
  config.validate();
  const Index n = a.rows(), m = a.cols(), k = config.n_topics;
  if (has_negative(a)) throw ContractError("factorize: input has negative or NaN entries");

  FactorPair out;
  const double total = sum_of(a);
  if (n == 0 || m == 0 || total == 0) {
    log::warning("factorize: input matrix is all zeros; returning zero factors");
    out.W = Eigen::MatrixXd::Zero(n, k);
    out.H = Eigen::MatrixXd::Zero(k, m);
    out.converged = true;
    out.objective.push_back(0.0);
    return out;
  }

  Eigen::MatrixXd& w = out.W;
  Eigen::MatrixXd& h = out.H;
  if (config.init == NmfInit::nndsvd) {
    nndsvd_init(dense(a), k, w, h);
  } else {
    std::mt19937_64 rng(config.seed);
    const double scale = std::sqrt(total / static_cast<double>(n * m) / static_cast<double>(k));
    random_init(n, k, scale, rng, w);
    random_init(k, m, scale, rng, h);
  }

  const double a_sq = a.squaredNorm();
  Eigen::MatrixXd at_w(m, k), a_ht(n, k), wtw(k, k), hht(k, k);
  auto objective = [&]() {
    // 0.5 (|A|^2 - 2 <W, A H^T> + <W^T W, H H^T>), with a_ht and hht current.
    wtw.noalias() = w.transpose() * w;
    const double f = 0.5 * (a_sq - 2.0 * w.cwiseProduct(a_ht).sum() + wtw.cwiseProduct(hht).sum());
    return std::max(f, 0.0);
  };
  a_ht.noalias() = a * h.transpose();
  hht.noalias() = h * h.transpose();
  double previous = objective();
  out.objective.push_back(previous);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    // H <- H * (W^T A) / (W^T W H)
    at_w.noalias() = a.transpose() * w;
    wtw.noalias() = w.transpose() * w;
    Eigen::MatrixXd denom_h = wtw * h;
    h.array() *= at_w.transpose().array() / denom_h.array().max(kNmfDenominatorFloor);

    // W <- W * (A H^T) / (W H H^T)
    a_ht.noalias() = a * h.transpose();
    hht.noalias() = h * h.transpose();
    Eigen::MatrixXd denom_w = w * hht;
    w.array() *= a_ht.array() / denom_w.array().max(kNmfDenominatorFloor);

    const double current = objective();
    out.objective.push_back(current);
    out.iterations = iter;
    if (config.on_iteration) config.on_iteration(iter, w, h, current);

    const double change = std::abs(previous - current) / std::max(previous, 1e-300);
    previous = current;
    if (change < config.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace

void NmfConfig::validate() const {
  if (n_topics < 1) throw ConfigError("n_topics must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(tol > 0)) throw ConfigError("tol must be > 0");
}

FactorPair factorize(const SparseMatrix& a, const NmfConfig& config) { return factorize_impl(a, config); }

FactorPair factorize(const Eigen::MatrixXd& a, const NmfConfig& config) { return factorize_impl(a, config); }

}  // namespace hyhtm
