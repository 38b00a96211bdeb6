#include "camdepth/gfilter.hpp"

#include <algorithm>
#include <cmath>

#include "camdepth/normalize.hpp"

namespace camdepth {

namespace {

// Summed-area table with a zero top/left border; S(x, y) covers [0,x) x [0,y).
struct Sat {
  int width = 0, height = 0;
  std::vector<double> s;

  Sat(int w, int h) : width(w), height(h), s(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

  double& at(int x, int y) { return s[static_cast<std::size_t>(y) * (width + 1) + x]; }
  double at(int x, int y) const { return s[static_cast<std::size_t>(y) * (width + 1) + x]; }

  // Inclusive rectangle sum [x0, x1] x [y0, y1].
  double rect(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }
};

template <typename Get>
Sat build_sat(int w, int h, Get get) {
  Sat sat(w, h);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += get(x, y);
      sat.at(x + 1, y + 1) = sat.at(x + 1, y) + row;
    }
  }
  return sat;
}

}  // namespace

BoxStats box_stats(const ScalarField& field, int radius) {
  if (radius < 0) throw std::invalid_argument("box_stats: radius must be >= 0");
  const int w = field.width, h = field.height;

  const Sat vs = build_sat(w, h, [&](int x, int y) {
    const auto i = field.idx(x, y);
    return field.valid[i] ? field.values[i] : 0.0;
  });
  const Sat cs = build_sat(w, h, [&](int x, int y) {
    return field.valid[field.idx(x, y)] ? 1.0 : 0.0;
  });

  BoxStats out;
  out.sum = ScalarField(w, h);
  out.count.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const auto i = out.sum.idx(x, y);
      out.sum.values[i] = vs.rect(x0, y0, x1, y1);
      out.count[i] = static_cast<std::int64_t>(std::llround(cs.rect(x0, y0, x1, y1)));
    }
  }
  return out;
}

ScalarField guided_filter(const ScalarField& guide, const ScalarField& input,
                          const GuidedFilterParams& params) {
  if (guide.width != input.width || guide.height != input.height)
    throw std::invalid_argument("guided_filter: dimension mismatch");
  if (params.radius < 0) throw std::invalid_argument("guided_filter: radius must be >= 0");
  if (params.epsilon < 0.0) throw std::invalid_argument("guided_filter: epsilon must be >= 0");
  if (params.min_valid < 1) throw std::invalid_argument("guided_filter: min_valid must be >= 1");

  const int w = guide.width, h = guide.height;
  const int r = params.radius;
  const std::size_t n = guide.size();

  std::vector<std::uint8_t> joint(n);
  for (std::size_t i = 0; i < n; ++i) joint[i] = guide.valid[i] && input.valid[i];

  auto masked = [&](int x, int y, double v) {
    return joint[static_cast<std::size_t>(y) * w + x] ? v : 0.0;
  };
  const Sat s_n = build_sat(w, h, [&](int x, int y) { return masked(x, y, 1.0); });
  const Sat s_g = build_sat(w, h, [&](int x, int y) { return masked(x, y, guide.at(x, y)); });
  const Sat s_a = build_sat(w, h, [&](int x, int y) { return masked(x, y, input.at(x, y)); });
  const Sat s_gg =
      build_sat(w, h, [&](int x, int y) { return masked(x, y, guide.at(x, y) * guide.at(x, y)); });
  const Sat s_ga =
      build_sat(w, h, [&](int x, int y) { return masked(x, y, guide.at(x, y) * input.at(x, y)); });

  // Per-window linear coefficients; windows under min_valid are disqualified.
  std::vector<double> xk(n, 0.0), yk(n, 0.0);
  std::vector<std::uint8_t> qualified(n, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const double nk = s_n.rect(x0, y0, x1, y1);
      if (nk < params.min_valid) continue;
      const double mean_g = s_g.rect(x0, y0, x1, y1) / nk;
      const double mean_a = s_a.rect(x0, y0, x1, y1) / nk;
      const double var_g = std::max(s_gg.rect(x0, y0, x1, y1) / nk - mean_g * mean_g, 0.0);
      const double cov_ga = s_ga.rect(x0, y0, x1, y1) / nk - mean_g * mean_a;
      const double denom = var_g + params.epsilon;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      xk[i] = denom > 0.0 ? cov_ga / denom : 0.0;
      yk[i] = mean_a - xk[i] * mean_g;
      qualified[i] = 1;
    }
  }

  // Average the coefficients over every qualifying window covering each pixel.
  const Sat s_q = build_sat(w, h, [&](int x, int y) {
    return qualified[static_cast<std::size_t>(y) * w + x] ? 1.0 : 0.0;
  });
  const Sat s_x = build_sat(w, h, [&](int x, int y) { return xk[static_cast<std::size_t>(y) * w + x]; });
  const Sat s_y = build_sat(w, h, [&](int x, int y) { return yk[static_cast<std::size_t>(y) * w + x]; });

  ScalarField out(w, h, 0.0, false);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const double nq = s_q.rect(x0, y0, x1, y1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (nq > 0.0 && guide.valid[i]) {
        const double mx = s_x.rect(x0, y0, x1, y1) / nq;
        const double my = s_y.rect(x0, y0, x1, y1) / nq;
        out.values[i] = mx * guide.values[i] + my;
        out.valid[i] = 1;
      } else {
        // No usable window (or no guide value): the input passes through.
        out.values[i] = input.values[i];
        out.valid[i] = input.valid[i];
      }
    }
  }
  return out;
}

std::vector<int> clamp_radii_pool(const std::vector<int>& pool, int width, int height) {
  const int cap = std::max(1, std::min(width, height) / 8);
  std::vector<int> out;
  for (int r : pool)
    if (r <= cap) out.push_back(r);
  if (out.empty()) out.push_back(cap);
  return out;
}

RescaleResult guided_rescale_augment(const ScalarField& value_noise, const DepthMap& gt,
                                     const RescaleAugmentParams& params, Rng& rng) {
  if (params.radii_pool.empty())
    throw std::invalid_argument("guided_rescale_augment: empty radii pool");
  if (!std::is_sorted(params.radii_pool.begin(), params.radii_pool.end()))
    throw std::invalid_argument("guided_rescale_augment: radii pool must be ascending");
  for (int r : params.radii_pool)
    if (r < 1) throw std::invalid_argument("guided_rescale_augment: radii must be >= 1");

  const std::vector<int> pool = clamp_radii_pool(params.radii_pool, gt.width, gt.height);
  const int radius = pool[rng.uniform_index(pool.size())];

  GuidedFilterParams gp;
  gp.radius = radius;
  gp.epsilon = params.epsilon;
  RescaleResult res;
  res.radius = radius;
  res.field = guided_filter(value_noise, to_disparity(gt), gp);
  return res;
}

}  // namespace camdepth
