#include "camdepth/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace camdepth {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (lower + m);
  }
  return m;
}

struct AffineFit {
  double scale = 0.0;
  double shift = 0.0;
  bool shift_only = false;
};

// Ordinary least squares of y ~ s*x + t over the given pairs. Falls back to a
// shift-only fit at the median y when x carries no spread.
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double xmin = x.empty() ? 0.0 : x[0], xmax = xmin;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    xmin = std::min(xmin, x[i]);
    xmax = std::max(xmax, x[i]);
  }
  const double det = n * sxx - sx * sx;
  AffineFit fit;
  // Identical rel values leave the system singular (the check is on the exact
  // spread; a summed variance picks up rounding noise here).
  if (x.size() < 2 || !(xmax > xmin) || !(det > 0.0)) {
    fit.shift_only = true;
    fit.scale = 0.0;
    fit.shift = median_of(y);
    return fit;
  }
  fit.scale = (n * sxy - sx * sy) / det;
  fit.shift = (sy - fit.scale * sx) / n;
  return fit;
}

}  // namespace

ScalarField to_disparity(const DepthMap& d, double d_floor) {
  if (!(d_floor > 0.0)) throw std::invalid_argument("to_disparity: d_floor must be > 0");
  ScalarField out(d.width, d.height, 0.0, false);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.valid[i]) {
      out.values[i] = 1.0 / std::max(d.values[i], d_floor);
      out.valid[i] = 1;
    }
  }
  return out;
}

NormalizedField affine_normalize(const DepthMap& d, double d_floor) {
  const ScalarField disp = to_disparity(d, d_floor);
  std::vector<double> xs;
  xs.reserve(disp.size());
  for (std::size_t i = 0; i < disp.size(); ++i)
    if (disp.valid[i]) xs.push_back(disp.values[i]);
  if (xs.empty()) throw std::runtime_error("affine_normalize: no valid pixels");

  const double shift = median_of(xs);
  double mad = 0.0;
  for (double x : xs) mad += std::abs(x - shift);
  mad /= static_cast<double>(xs.size());

  NormalizedField out;
  out.params.shift = shift;
  out.params.degenerate = mad < kScaleFloor;
  out.params.scale = std::max(mad, kScaleFloor);

  out.field = ScalarField(d.width, d.height, 0.0, false);
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (disp.valid[i]) {
      out.field.values[i] = (disp.values[i] - shift) / out.params.scale;
      out.field.valid[i] = 1;
    }
  }
  if (out.params.degenerate)
    std::fill(out.field.values.begin(), out.field.values.end(), 0.0);
  return out;
}

DepthMap affine_recover(const ScalarField& rel, const DepthMap& ref, double d_floor) {
  if (rel.width != ref.width || rel.height != ref.height)
    throw std::invalid_argument("affine_recover: dimension mismatch");

  const ScalarField ref_disp = to_disparity(ref, d_floor);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel.valid[i] && ref_disp.valid[i]) {
      xs.push_back(rel.values[i]);
      ys.push_back(ref_disp.values[i]);
    }
  }
  if (xs.empty()) throw std::runtime_error("affine_recover: no valid overlap");

  AffineFit fit = fit_affine(xs, ys);

  // One trimmed re-fit: drop the worst 20% residuals and solve again.
  if (!fit.shift_only && xs.size() >= 2) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> res(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      res[i] = std::abs(fit.scale * xs[i] + fit.shift - ys[i]);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return res[a] < res[b]; });
    const std::size_t keep = xs.size() - xs.size() / 5;
    if (keep >= 2) {
      std::vector<double> xk, yk;
      xk.reserve(keep);
      yk.reserve(keep);
      for (std::size_t i = 0; i < keep; ++i) {
        xk.push_back(xs[order[i]]);
        yk.push_back(ys[order[i]]);
      }
      const AffineFit refit = fit_affine(xk, yk);
      if (!refit.shift_only) fit = refit;
    }
  }

  DepthMap out(rel.width, rel.height);
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (!rel.valid[i]) continue;
    const double disp = std::max(fit.scale * rel.values[i] + fit.shift, kDisparityFloor);
    out.values[i] = 1.0 / disp;
    out.valid[i] = 1;
  }
  return out;
}

}  // namespace camdepth
