#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "reclap/contrastive.hpp"
#include "reclap/rng.hpp"
#include "reclap/tensor.hpp"

using namespace reclap;

namespace {

// Random batch of unit-norm rows.
Tensor2D random_unit_rows(std::size_t rows, std::size_t cols,
                          std::uint64_t seed) {
  Rng rng(seed);
  Tensor2D t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        t.at(r, c) = rng.normal();
        norm_sq += t.at(r, c) * t.at(r, c);
      }
    } while (norm_sq < 1e-6);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t c = 0; c < cols; ++c) t.at(r, c) *= inv;
  }
  return t;
}

SimilarityMatrix matrix_from(const Tensor2D& values, double tau = 1.0) {
  return SimilarityMatrix{values, tau, values.rows};
}

}  // namespace

TEST_CASE("similarity of a unit vector with itself is tau") {
  Tensor2D e1(1, 3, {1.0, 0.0, 0.0});
  CHECK(similarity_matrix(e1, e1, 1.0).values.at(0, 0) == 1.0);

  Tensor2D e2(1, 3, {0.0, 1.0, 0.0});
  CHECK(similarity_matrix(e1, e2, 5.0).values.at(0, 0) == 0.0);
}

TEST_CASE("similarity scales cosines by tau") {
  // cos = 0.5 pair: (1,0) and (0.5, sqrt(3)/2)
  Tensor2D a(1, 2, {1.0, 0.0});
  Tensor2D t(1, 2, {0.5, std::sqrt(3.0) / 2.0});
  CHECK(similarity_matrix(a, t, 100.0).values.at(0, 0) ==
        doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("similarity entries are bounded by tau") {
  const double tau = 14.285714285714286;
  const Tensor2D a = random_unit_rows(8, 5, 1);
  const Tensor2D t = random_unit_rows(8, 5, 2);
  const SimilarityMatrix sim = similarity_matrix(a, t, tau);
  CHECK(sim.batch == 8);
  CHECK(sim.tau == tau);
  for (const double v : sim.values.data) {
    CHECK(std::abs(v) <= tau + 1e-6);
  }
}

TEST_CASE("similarity rejects malformed inputs") {
  const Tensor2D a = random_unit_rows(2, 3, 3);
  CHECK_THROWS_AS(similarity_matrix(a, random_unit_rows(3, 3, 4), 1.0),
                  std::runtime_error);
  CHECK_THROWS_AS(similarity_matrix(a, random_unit_rows(2, 4, 4), 1.0),
                  std::runtime_error);
  CHECK_THROWS_AS(similarity_matrix(a, a, 0.0), std::runtime_error);
  CHECK_THROWS_AS(similarity_matrix(a, a, -1.0), std::runtime_error);

  Tensor2D not_unit(2, 3, {2.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  CHECK_THROWS_WITH_AS(similarity_matrix(not_unit, a, 1.0),
                       doctest::Contains("unit norm"), std::runtime_error);
}

TEST_CASE("single-element batch has zero loss") {
  const ContrastiveResult res =
      contrastive_loss(matrix_from(Tensor2D(1, 1, {3.7})));
  CHECK(res.loss == 0.0);
  CHECK(res.grad.at(0, 0) == 0.0);
}

TEST_CASE("constant similarity gives exactly ln B") {
  for (const std::size_t B : {std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
    CAPTURE(B);
    Tensor2D zeros(B, B);
    CHECK(contrastive_loss(matrix_from(zeros)).loss ==
          std::log(static_cast<double>(B)));

    Tensor2D constant(B, B);
    constant.fill(3.25);
    CHECK(contrastive_loss(matrix_from(constant)).loss ==
          std::log(static_cast<double>(B)));
  }
}

TEST_CASE("identity similarity matches the closed form") {
  Tensor2D eye(2, 2, {1.0, 0.0, 0.0, 1.0});
  const ContrastiveResult res = contrastive_loss(matrix_from(eye));
  // -ln(e / (e + 1)) = ln(1 + e^-1), frozen from an independent evaluation.
  CHECK(res.loss == 0.31326168751822286);
}

TEST_CASE("dominant diagonal drives the loss toward zero") {
  Tensor2D c(4, 4);
  for (std::size_t i = 0; i < 4; ++i) c.at(i, i) = 10.0;
  CHECK(contrastive_loss(matrix_from(c)).loss < 1e-3);
  CHECK(contrastive_loss(matrix_from(c)).loss >= 0.0);
}

TEST_CASE("loss is non-negative on random similarity matrices") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor2D a = random_unit_rows(5, 4, 100 + seed);
    const Tensor2D t = random_unit_rows(5, 4, 200 + seed);
    CHECK(contrastive_loss(similarity_matrix(a, t, 10.0)).loss >= 0.0);
  }
}

TEST_CASE("loss is exactly symmetric under transposition") {
  const Tensor2D a = random_unit_rows(6, 4, 11);
  const Tensor2D t = random_unit_rows(6, 4, 12);
  const SimilarityMatrix sim = similarity_matrix(a, t, 7.5);
  const SimilarityMatrix simT = matrix_from(transpose(sim.values), sim.tau);
  CHECK(contrastive_loss(sim).loss == contrastive_loss(simT).loss);
}

TEST_CASE("loss is bit-identical under exactly representable shifts") {
  // Entries on a dyadic grid so that the +128.5 shift is exact.
  Rng rng(77);
  Tensor2D c(5, 5);
  for (auto& v : c.data) {
    v = static_cast<double>(rng.index(257)) / 64.0 - 2.0;
  }
  Tensor2D shifted = c;
  for (auto& v : shifted.data) v += 128.5;

  const ContrastiveResult base = contrastive_loss(matrix_from(c));
  const ContrastiveResult moved = contrastive_loss(matrix_from(shifted));
  CHECK(base.loss == moved.loss);
  for (std::size_t i = 0; i < base.grad.data.size(); ++i) {
    CHECK(base.grad.data[i] == moved.grad.data[i]);
  }
}

TEST_CASE("grad_C matches central finite differences") {
  const Tensor2D a = random_unit_rows(4, 6, 21);
  const Tensor2D t = random_unit_rows(4, 6, 22);
  SimilarityMatrix sim = similarity_matrix(a, t, 2.0);
  const Tensor2D grad = contrastive_loss(sim).grad;

  const double h = 1e-6;
  for (std::size_t i = 0; i < sim.values.rows; ++i) {
    for (std::size_t j = 0; j < sim.values.cols; ++j) {
      const double saved = sim.values.at(i, j);
      sim.values.at(i, j) = saved + h;
      const double up = contrastive_loss(sim).loss;
      sim.values.at(i, j) = saved - h;
      const double down = contrastive_loss(sim).loss;
      sim.values.at(i, j) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad.at(i, j);
      const double rel = std::abs(analytic - numeric) /
                         std::max(std::abs(analytic), std::abs(numeric));
      CHECK(rel < 1e-6);
    }
  }
}

TEST_CASE("gradient rows and columns sum to zero") {
  // Softmax gradients are mean-zero along the normalized axis; summed over
  // the whole matrix both contributions cancel.
  const Tensor2D a = random_unit_rows(5, 4, 31);
  const Tensor2D t = random_unit_rows(5, 4, 32);
  const Tensor2D grad = contrastive_loss(similarity_matrix(a, t, 5.0)).grad;
  double total = 0.0;
  for (const double v : grad.data) total += v;
  CHECK(total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("non-finite similarity entries are rejected") {
  Tensor2D c(2, 2);
  c.at(0, 1) = std::nan("");
  CHECK_THROWS_AS(contrastive_loss(matrix_from(c)), std::runtime_error);
  CHECK_THROWS_AS(contrastive_loss(matrix_from(Tensor2D(2, 3))),
                  std::runtime_error);
}

TEST_CASE("select_caption keeps the original below p") {
  const std::string original = "a dog barks";
  const std::vector<std::string> rewrites = {"r0", "r1", "r2", "r3"};
  AugmentationPolicy policy;  // p = 0.4, K = 4

  CHECK(select_caption(original, rewrites, policy, 0.10) == original);
  CHECK(select_caption(original, rewrites, policy, 0.0) == original);
  CHECK(select_caption(original, rewrites, policy, 0.39999) == original);
}

TEST_CASE("select_caption maps the rewrite interval into equal slots") {
  const std::string original = "a dog barks";
  const std::vector<std::string> rewrites = {"r0", "r1", "r2", "r3"};
  AugmentationPolicy policy;  // p = 0.4, K = 4, slots of width 0.15

  CHECK(select_caption(original, rewrites, policy, 0.40) == "r0");
  CHECK(select_caption(original, rewrites, policy, 0.54) == "r0");
  CHECK(select_caption(original, rewrites, policy, 0.55) == "r1");
  CHECK(select_caption(original, rewrites, policy, 0.70) == "r2");
  CHECK(select_caption(original, rewrites, policy, 0.84) == "r2");
  CHECK(select_caption(original, rewrites, policy, 0.85) == "r3");
  CHECK(select_caption(original, rewrites, policy, 0.9999999) == "r3");
}

TEST_CASE("degenerate policies always return the original") {
  const std::string original = "a dog barks";
  const std::vector<std::string> rewrites = {"r0", "r1", "r2", "r3"};

  AugmentationPolicy all_original;
  all_original.p = 1.0;
  for (const double u : {0.0, 0.2, 0.5, 0.99}) {
    CHECK(select_caption(original, rewrites, all_original, u) == original);
  }

  AugmentationPolicy no_rewrites;
  no_rewrites.rewrite_count = 0;
  CHECK(select_caption(original, {}, no_rewrites, 0.99) == original);
}

TEST_CASE("select_caption validates the rewrite list and p") {
  const std::string original = "a dog barks";
  AugmentationPolicy policy;
  CHECK_THROWS_WITH_AS(select_caption(original, {"only one"}, policy, 0.7),
                       doctest::Contains("rewrites"), std::runtime_error);

  AugmentationPolicy bad;
  bad.p = 1.5;
  CHECK_THROWS_AS(select_caption(original, {}, bad, 0.1), std::runtime_error);
}

TEST_CASE("selection frequencies over 100k draws match the policy") {
  const std::string original = "orig";
  const std::vector<std::string> rewrites = {"r0", "r1", "r2", "r3"};
  AugmentationPolicy policy;  // p = 0.4, K = 4

  Rng rng(123);
  std::size_t original_count = 0;
  std::array<std::size_t, 4> rewrite_count{};
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    const std::string& pick =
        select_caption(original, rewrites, policy, rng.uniform());
    if (pick == original) {
      ++original_count;
    } else {
      ++rewrite_count[static_cast<std::size_t>(pick[1] - '0')];
    }
  }
  const double n = static_cast<double>(draws);
  CHECK(std::abs(static_cast<double>(original_count) / n - 0.4) < 0.005);
  for (const std::size_t count : rewrite_count) {
    CHECK(std::abs(static_cast<double>(count) / n - 0.15) < 0.005);
  }
}
