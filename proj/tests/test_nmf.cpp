#include <catch2/catch_amalgamated.hpp>

#include "l2i/core/rng.hpp"
#include "l2i/nmf/nmf.hpp"

using namespace l2i;

namespace {

Eigen::MatrixXf random_nonneg(int rows, int cols, std::uint64_t seed, double lo = 0.0,
                              double hi = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXf m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = static_cast<float>(rng.uniform(lo, hi));
  return m;
}

}  // namespace

TEST_CASE("objective trace is non-increasing on seeded instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXf X = random_nonneg(24, 30, seed + 100, 0.0, 2.0);
    NmfConfig cfg;
    cfg.k = 5;
    cfg.mu = 0.2;
    cfg.max_iters = 60;
    cfg.rel_tol = 0.0;  // run all iterations
    cfg.seed = seed;
    const NmfResult res = sparse_nmf_fit(X, cfg);
    REQUIRE(res.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
      REQUIRE(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-10);
  }
}

TEST_CASE("exact rank-1 instance is recovered") {
  Rng rng(11);
  Eigen::VectorXf w(16), h(20);
  for (int i = 0; i < 16; ++i) w(i) = static_cast<float>(rng.uniform(0.1, 1.0));
  for (int i = 0; i < 20; ++i) h(i) = static_cast<float>(rng.uniform(0.1, 1.0));
  const Eigen::MatrixXf X = w * h.transpose();
  NmfConfig cfg;
  cfg.k = 1;
  cfg.mu = 0.0;
  cfg.max_iters = 500;
  cfg.rel_tol = 0.0;
  cfg.seed = 2;
  const NmfResult res = sparse_nmf_fit(X, cfg);
  REQUIRE(res.objective_trace.back() < 1e-8 * static_cast<double>(X.squaredNorm()));
}

TEST_CASE("dictionary columns have unit norm after fitting") {
  const Eigen::MatrixXf X = random_nonneg(20, 25, 5, 0.0, 1.0);
  NmfConfig cfg;
  cfg.k = 4;
  cfg.mu = 0.1;
  cfg.max_iters = 50;
  cfg.seed = 5;
  const NmfResult res = sparse_nmf_fit(X, cfg);
  for (int k = 0; k < res.dict.components(); ++k)
    REQUIRE(std::abs(res.dict.atoms.col(k).norm() - 1.0f) < 1e-4f);
}

TEST_CASE("frozen columns are preserved bitwise") {
  const Eigen::MatrixXf X = random_nonneg(18, 22, 6, 0.0, 1.0);
  Dictionary init;
  init.atoms = random_nonneg(18, 2, 7, 0.1, 1.0);
  for (int k = 0; k < 2; ++k) init.atoms.col(k).normalize();
  init.frozen = {true, true};
  NmfConfig cfg;
  cfg.k = 5;
  cfg.mu = 0.1;
  cfg.max_iters = 40;
  cfg.seed = 8;
  const NmfResult res = sparse_nmf_fit(X, cfg, init);
  for (int k = 0; k < 2; ++k)
    for (int f = 0; f < 18; ++f)
      REQUIRE(res.dict.atoms(f, k) == init.atoms(f, k));  // bitwise
  REQUIRE(res.dict.frozen == std::vector<bool>{true, true, false, false, false});
}

TEST_CASE("single-column activation matches the closed-form sparse solution") {
  // With a fixed unit-norm atom w and one data column x, the minimizer of
  // ||x - w h||^2 + mu*h over h >= 0 is h* = max(0, w.x - mu/2).
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed + 40);
    Eigen::VectorXf w(12);
    for (int i = 0; i < 12; ++i) w(i) = static_cast<float>(rng.uniform(0.05, 1.0));
    w.normalize();
    Eigen::MatrixXf x(12, 1);
    for (int i = 0; i < 12; ++i) x(i, 0) = static_cast<float>(rng.uniform(0.0, 2.0));

    Dictionary dict;
    dict.atoms = w;
    dict.frozen = {false};
    NmfConfig cfg;
    cfg.k = 1;
    cfg.mu = 0.3;
    cfg.max_iters = 2000;
    cfg.rel_tol = 0.0;
    cfg.seed = seed;
    const Eigen::MatrixXf h = infer_activations(x, dict, cfg);

    const double expected =
        std::max(0.0, static_cast<double>(w.dot(x.col(0))) - cfg.mu / 2.0);
    REQUIRE(std::abs(static_cast<double>(h(0, 0)) - expected) < 1e-5);
  }
}

TEST_CASE("build_training_matrix averages non-overlapping chunks") {
  Eigen::MatrixXf m(2, 7);
  for (int t = 0; t < 7; ++t) {
    m(0, t) = static_cast<float>(t);
    m(1, t) = static_cast<float>(10 + t);
  }
  const Eigen::MatrixXf out = build_training_matrix({m}, 3);
  REQUIRE(out.cols() == 3);
  REQUIRE(out(0, 0) == Catch::Approx(1.0));        // mean(0,1,2)
  REQUIRE(out(0, 1) == Catch::Approx(4.0));        // mean(3,4,5)
  REQUIRE(out(0, 2) == Catch::Approx(6.0));        // remainder of length 1
  REQUIRE(out(1, 0) == Catch::Approx(11.0));
}

TEST_CASE("nmf input validation") {
  Eigen::MatrixXf X = random_nonneg(10, 10, 9);
  X(0, 0) = -0.1f;
  NmfConfig cfg;
  cfg.k = 2;
  REQUIRE_THROWS_AS(sparse_nmf_fit(X, cfg), Error);
  cfg.k = 50;
  REQUIRE_THROWS_AS(sparse_nmf_fit(random_nonneg(10, 10, 9), cfg), Error);
}
