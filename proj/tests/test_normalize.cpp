#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "camdepth/normalize.hpp"
#include "camdepth/rng.hpp"
#include "test_util.hpp"

using namespace camdepth;

TEST_CASE("to_disparity: values, holes, floor clamp") {
  DepthMap d(3, 1);
  d.set(0, 0, 2.0);
  d.set(2, 0, 1e-9);
  const ScalarField disp = to_disparity(d);  // default floor 1e-6 m
  CHECK(disp.at(0, 0) == doctest::Approx(0.5));
  CHECK_FALSE(disp.is_valid(1, 0));
  CHECK(disp.at(2, 0) == doctest::Approx(1e6));
}

TEST_CASE("affine_normalize: hand-computed 3-pixel case") {
  // depths 1, 0.5, 1/3 give disparities 1, 2, 3
  DepthMap d(3, 1);
  d.set(0, 0, 1.0);
  d.set(1, 0, 0.5);
  d.set(2, 0, 1.0 / 3.0);
  const NormalizedField n = affine_normalize(d);
  CHECK(n.params.shift == doctest::Approx(2.0));
  CHECK(n.params.scale == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(n.params.degenerate);
  CHECK(n.field.at(0, 0) == doctest::Approx(-1.5));
  CHECK(n.field.at(1, 0) == doctest::Approx(0.0));
  CHECK(n.field.at(2, 0) == doctest::Approx(1.5));
}

TEST_CASE("affine_normalize: constant map is degenerate and all-zero") {
  DepthMap d(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) d.set(x, y, 2.5);
  const NormalizedField n = affine_normalize(d);
  CHECK(n.params.degenerate);
  CHECK(n.params.scale == kScaleFloor);
  for (double v : n.field.values) CHECK(v == 0.0);
}

TEST_CASE("affine_normalize: errors without valid pixels") {
  DepthMap d(4, 4);  // all holes
  CHECK_THROWS(affine_normalize(d));
}

namespace {

double field_median(const ScalarField& f) {
  std::vector<double> xs;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (f.valid[i]) xs.push_back(f.values[i]);
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

double field_mad_about_zero(const ScalarField& f) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!f.valid[i]) continue;
    sum += std::abs(f.values[i] - field_median(f));
    ++n;
  }
  return sum / n;
}

}  // namespace

TEST_CASE("affine_normalize: output has median 0 and MAD 1 on random maps") {
  Rng rng = derive_rng(11, 0, "normalize-prop");
  for (int trial = 0; trial < 20; ++trial) {
    const DepthMap d = testutil::random_depth(rng, 12, 9, 0.4, 6.0, trial % 2 ? 0.25 : 0.0);
    const NormalizedField n = affine_normalize(d);
    REQUIRE_FALSE(n.params.degenerate);
    CHECK(std::abs(field_median(n.field)) < 1e-12);
    CHECK(field_mad_about_zero(n.field) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("affine_normalize: invariant to positive affine disparity reparameterization") {
  Rng rng = derive_rng(11, 1, "normalize-affine");
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.uniform(0.2, 4.0);
    const double b = rng.uniform(0.0, 2.0);
    DepthMap d1(10, 8), d2(10, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 10; ++x) {
        const double disp = rng.uniform(0.3, 3.0);
        d1.set(x, y, 1.0 / disp);
        d2.set(x, y, 1.0 / (a * disp + b));
      }
    }
    const NormalizedField n1 = affine_normalize(d1);
    const NormalizedField n2 = affine_normalize(d2);
    for (std::size_t i = 0; i < n1.field.values.size(); ++i)
      CHECK(std::abs(n1.field.values[i] - n2.field.values[i]) < 1e-9);
  }
}

TEST_CASE("affine_recover: roundtrip reproduces the input depth") {
  Rng rng = derive_rng(11, 2, "recover-roundtrip");
  for (int trial = 0; trial < 20; ++trial) {
    const double holes = trial % 2 ? 0.3 : 0.0;
    const DepthMap d = testutil::random_depth(rng, 14, 11, 0.5, 5.0, holes);
    const NormalizedField n = affine_normalize(d);
    const DepthMap back = affine_recover(n.field, d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d.valid[i]) continue;
      REQUIRE(back.valid[i]);
      CHECK(std::abs(back.values[i] - d.values[i]) / d.values[i] < 1e-6);
    }
  }
}

TEST_CASE("affine_recover: exact on synthetic affine pairs") {
  Rng rng = derive_rng(11, 3, "recover-affine");
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.uniform(0.5, 3.0);
    const double b = rng.uniform(-0.1, 0.5);
    const DepthMap ref = testutil::random_depth(rng, 9, 7, 0.5, 4.0);
    ScalarField rel(9, 7);
    for (std::size_t i = 0; i < rel.values.size(); ++i)
      rel.values[i] = a * (1.0 / ref.values[i]) + b;
    const DepthMap out = affine_recover(rel, ref);
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(out.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("affine_recover: trimmed re-fit shrugs off a corrupted reference minority") {
  Rng rng = derive_rng(11, 4, "recover-outliers");
  for (int trial = 0; trial < 8; ++trial) {
    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(0.0, 0.3);
    const DepthMap clean = testutil::random_depth(rng, 20, 15, 0.5, 4.0);
    ScalarField rel(20, 15);
    for (std::size_t i = 0; i < rel.values.size(); ++i)
      rel.values[i] = a * (1.0 / clean.values[i]) + b;

    // Corrupt exactly 12% of the reference depths (below the 20% trim), with
    // wildly wrong values. The re-fit must land on the clean line, so the
    // recovered map matches the uncorrupted reference everywhere.
    DepthMap noisy = clean;
    const std::size_t n_corrupt = rel.size() * 12 / 100;
    std::vector<std::size_t> order(rel.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t k = 0; k < n_corrupt; ++k)
      noisy.values[order[k]] = rng.uniform(0.02, 0.05);  // 20x-50x disparity blowup

    const DepthMap out = affine_recover(rel, noisy);
    for (std::size_t i = 0; i < clean.size(); ++i)
      CHECK(std::abs(out.values[i] - clean.values[i]) / clean.values[i] < 1e-9);
  }
}

TEST_CASE("affine_recover: degenerate rel takes the shift-only path") {
  DepthMap ref(3, 1);
  ref.set(0, 0, 1.0);   // disparity 1
  ref.set(1, 0, 0.5);   // disparity 2
  ref.set(2, 0, 0.25);  // disparity 4
  ScalarField rel(3, 1, 0.7);  // constant
  const DepthMap out = affine_recover(rel, ref);
  // median reference disparity is 2 -> constant depth 0.5
  for (int x = 0; x < 3; ++x) CHECK(out.at(x, 0) == doctest::Approx(0.5));
}

TEST_CASE("affine_recover: zero overlap is an error") {
  DepthMap ref(2, 1);
  ref.set(0, 0, 1.0);
  ScalarField rel(2, 1, 0.0, false);
  rel.set(1, 0, 1.0);  // only valid where ref is invalid
  CHECK_THROWS(affine_recover(rel, ref));
}

TEST_CASE("affine_recover: clamps recovered disparity at the floor") {
  DepthMap ref(4, 1);
  ref.set(0, 0, 1.0);
  ref.set(1, 0, 0.5);
  ref.set(2, 0, 0.25);
  ref.set(3, 0, 0.125);
  ScalarField rel(4, 1);
  rel.values = {1.0, 2.0, 4.0, 8.0};
  rel.set(0, 0, -100.0);  // forces a wildly negative recovered disparity here
  const DepthMap out = affine_recover(rel, ref);
  CHECK(out.is_valid(0, 0));
  CHECK(out.at(0, 0) > 0.0);
  CHECK(out.at(0, 0) <= 1.0 / kDisparityFloor);
}
