#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "l2i/core/error.hpp"
#include "l2i/core/rng.hpp"

namespace l2i {

// Nonnegative spectral dictionary with unit-norm columns. Frozen columns are
// kept bitwise intact by all updates.
struct Dictionary {
  Eigen::MatrixXf atoms;            // F x K
  std::vector<bool> frozen;         // per column
  std::vector<std::string> labels;  // per column, may be empty strings

  int bins() const { return static_cast<int>(atoms.rows()); }
  int components() const { return static_cast<int>(atoms.cols()); }
};

struct NmfConfig {
  int k = 100;
  double mu = 0.1;
  int max_iters = 500;
  double rel_tol = 1e-5;
  std::uint64_t seed = 0;
};

struct NmfResult {
  Dictionary dict;
  Eigen::MatrixXf activations;        // K x N
  std::vector<double> objective_trace;  // ||X - WH||_F^2 + mu*||H||_1 per iteration
};

namespace detail {

inline constexpr double kNmfFloor = 1e-12;
inline constexpr double kInitFloor = 1e-3;  // multiplicative updates cannot leave exact zeros

inline Eigen::MatrixXd random_uniform(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = kInitFloor + (1.0 - kInitFloor) * rng.uniform();
  return m;
}

inline double nmf_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                            const Eigen::MatrixXd& H, double mu) {
  return (X - W * H).squaredNorm() + mu * H.array().abs().sum();
}

// H <- H .* (W^T X) ./ (W^T W H + mu/2); majorization step for
// ||X - WH||_F^2 + mu*||H||_1 with W fixed.
inline void update_h(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W, Eigen::MatrixXd& H,
                     double mu) {
  const Eigen::MatrixXd num = W.transpose() * X;
  const Eigen::MatrixXd den = ((W.transpose() * W) * H).array() + mu / 2.0 + kNmfFloor;
  H = H.cwiseProduct(num.cwiseQuotient(den));
}

// W <- W .* (X H^T) ./ (W H H^T), then each non-frozen column is scaled to
// unit norm with the factor absorbed into the matching H row (WH preserved).
inline void update_w(const Eigen::MatrixXd& X, Eigen::MatrixXd& W, Eigen::MatrixXd& H,
                     const std::vector<bool>& frozen) {
  const Eigen::MatrixXd A = X * H.transpose();
  const Eigen::MatrixXd B = W * (H * H.transpose());
  for (int k = 0; k < W.cols(); ++k) {
    if (frozen[k]) continue;
    const Eigen::VectorXd den = B.col(k).array() + kNmfFloor;
    W.col(k) = W.col(k).cwiseProduct(A.col(k).cwiseQuotient(den));
    const double norm = W.col(k).norm();
    if (norm > kNmfFloor) {
      W.col(k) /= norm;
      H.row(k) *= norm;
    }
  }
}

}  // namespace detail

// Sparse-NMF by multiplicative updates: minimizes
// ||X - WH||_F^2 + mu*||H||_1 subject to W,H >= 0 and unit-norm W columns.
inline NmfResult sparse_nmf_fit(const Eigen::MatrixXf& X_train, const NmfConfig& cfg,
                                const std::optional<Dictionary>& init_W = std::nullopt) {
  const int F = static_cast<int>(X_train.rows());
  const int N = static_cast<int>(X_train.cols());
  require(cfg.k >= 1, "component count must be >= 1");
  require(cfg.mu >= 0.0 && cfg.max_iters >= 1 && cfg.rel_tol >= 0.0, "invalid NMF config");
  require(X_train.minCoeff() >= 0.0f, "training matrix has negative entries");
  require(cfg.k <= std::min(F, N), "component count exceeds min(F, N)");

  Rng rng(cfg.seed);
  const Eigen::MatrixXd X = X_train.cast<double>();

  std::vector<bool> frozen(cfg.k, false);
  Eigen::MatrixXd W = detail::random_uniform(F, cfg.k, rng);
  if (init_W) {
    require(init_W->bins() == F, "init dictionary rows do not match data");
    require(init_W->components() <= cfg.k, "init dictionary has more columns than k");
    for (int k = 0; k < init_W->components(); ++k) {
      W.col(k) = init_W->atoms.col(k).cast<double>();
      frozen[k] = init_W->frozen.empty() ? false : init_W->frozen[k];
    }
  }
  for (int k = 0; k < cfg.k; ++k) {
    if (frozen[k]) continue;
    const double norm = W.col(k).norm();
    if (norm > detail::kNmfFloor) W.col(k) /= norm;
  }
  Eigen::MatrixXd H = detail::random_uniform(cfg.k, N, rng);

  NmfResult res;
  double prev = detail::nmf_objective(X, W, H, cfg.mu);
  for (int it = 0; it < cfg.max_iters; ++it) {
    detail::update_h(X, W, H, cfg.mu);
    detail::update_w(X, W, H, frozen);
    const double obj = detail::nmf_objective(X, W, H, cfg.mu);
    res.objective_trace.push_back(obj);
    if (prev > 0.0 && (prev - obj) < cfg.rel_tol * prev) {
      break;
    }
    prev = obj;
  }

  res.dict.atoms = W.cast<float>();
  if (init_W) {  // frozen columns stay bitwise identical to their input
    for (int k = 0; k < init_W->components(); ++k)
      if (frozen[k]) res.dict.atoms.col(k) = init_W->atoms.col(k);
  }
  res.dict.frozen = frozen;
  res.dict.labels.assign(cfg.k, "");
  res.activations = H.cast<float>();
  return res;
}

// Projection onto a fixed dictionary: same H update and stopping rule, W
// never modified.
inline Eigen::MatrixXf infer_activations(const Eigen::MatrixXf& X, const Dictionary& dict,
                                         const NmfConfig& cfg) {
  require(X.rows() == dict.bins(), "spectrogram bins do not match dictionary");
  require(X.minCoeff() >= 0.0f, "input matrix has negative entries");

  Rng rng(cfg.seed);
  const Eigen::MatrixXd Xd = X.cast<double>();
  const Eigen::MatrixXd W = dict.atoms.cast<double>();
  Eigen::MatrixXd H = detail::random_uniform(dict.components(), static_cast<int>(X.cols()), rng);

  double prev = detail::nmf_objective(Xd, W, H, cfg.mu);
  for (int it = 0; it < cfg.max_iters; ++it) {
    detail::update_h(Xd, W, H, cfg.mu);
    const double obj = detail::nmf_objective(Xd, W, H, cfg.mu);
    if (prev > 0.0 && (prev - obj) < cfg.rel_tol * prev) break;
    prev = obj;
  }
  return H.cast<float>();
}

// Averages each spectrogram's columns over non-overlapping chunks (remainder
// averaged over its actual length) and concatenates the results.
inline Eigen::MatrixXf build_training_matrix(const std::vector<Eigen::MatrixXf>& log_mags,
                                             int chunk) {
  require(chunk >= 1, "chunk must be >= 1");
  require(!log_mags.empty(), "no spectrograms given");
  const int F = static_cast<int>(log_mags.front().rows());

  int total = 0;
  for (const auto& m : log_mags) {
    require(m.rows() == F, "spectrogram bin counts differ");
    total += (static_cast<int>(m.cols()) + chunk - 1) / chunk;
  }
  Eigen::MatrixXf out(F, total);
  int col = 0;
  for (const auto& m : log_mags) {
    const int T = static_cast<int>(m.cols());
    for (int start = 0; start < T; start += chunk) {
      const int n = std::min(chunk, T - start);
      out.col(col++) = m.middleCols(start, n).rowwise().mean();
    }
  }
  return out;
}

}  // namespace l2i
