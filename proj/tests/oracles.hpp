#pragma once

// Independent reference implementations used only by tests. Everything here
// is computed from first principles (direct formulas, long double, no
// exponent shifting) so agreement with the library is meaningful.

#include <cmath>
#include <utility>
#include <vector>

#include "crowdcount/annotations.hpp"
#include "crowdcount/bayes_loss.hpp"
#include "crowdcount/density.hpp"

namespace oracle {

inline double normal_cdf(double t) {
  return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

// Mass of a unit 2D Gaussian centered at z inside the axis-aligned window
// [x0,x1] x [y0,y1]: product of two 1D CDF differences.
inline double window_mass(crowdcount::Point z, double sigma, double x0,
                          double x1, double y0, double y1) {
  const double fx =
      normal_cdf((x1 - z.x) / sigma) - normal_cdf((x0 - z.x) / sigma);
  const double fy =
      normal_cdf((y1 - z.y) / sigma) - normal_cdf((y0 - z.y) / sigma);
  return fx * fy;
}

// Analytic total mass of the frame's ground-truth density over the pixel
// rectangle covered by a grid derived from it.
inline double frame_mass(const crowdcount::FrameAnnotation& frame,
                         const crowdcount::GridSpec& spec, double sigma) {
  double sum = 0.0;
  for (const crowdcount::Point& z : frame.points) {
    sum += window_mass(z, sigma, 0.0, spec.cols * spec.stride, 0.0,
                       spec.rows * spec.stride);
  }
  return sum;
}

inline long double head_likelihood(crowdcount::Point x, crowdcount::Point z,
                                   double sigma) {
  const long double dx = x.x - z.x;
  const long double dy = x.y - z.y;
  const long double s2 = static_cast<long double>(sigma) * sigma;
  return std::exp(-(dx * dx + dy * dy) / (2.0L * s2)) /
         (2.0L * 3.14159265358979323846264338327950288L * s2);
}

inline long double bg_likelihood(crowdcount::Point x,
                                 const crowdcount::FrameAnnotation& frame,
                                 double sigma, double d_pixels) {
  long double min_r = -1.0L;
  for (const crowdcount::Point& z : frame.points) {
    const long double dx = x.x - z.x;
    const long double dy = x.y - z.y;
    const long double r = std::sqrt(dx * dx + dy * dy);
    if (min_r < 0.0L || r < min_r) min_r = r;
  }
  const long double s2 = static_cast<long double>(sigma) * sigma;
  const long double gap = min_r - static_cast<long double>(d_pixels);
  return std::exp(-gap * gap / (2.0L * s2)) /
         (2.0L * 3.14159265358979323846264338327950288L * s2);
}

// Direct Bayes-rule posterior row for one cell; background handled per the
// corrected numerator. Long double, no shifting.
inline std::vector<double> posterior_row(
    crowdcount::Point x, const crowdcount::FrameAnnotation& frame,
    const crowdcount::BayesConfig& cfg) {
  const int n = frame.head_count();
  const bool bg = cfg.background_enabled;
  std::vector<long double> lk(n + (bg ? 1 : 0));
  for (int k = 0; k < n; ++k) {
    lk[k] = head_likelihood(x, frame.points[k], cfg.sigma);
  }
  if (bg) {
    lk[n] = bg_likelihood(x, frame, cfg.sigma,
                          cfg.background_distance_pixels(frame));
  }
  long double denom = 0.0L;
  for (long double v : lk) denom += v;
  std::vector<double> row(lk.size());
  for (std::size_t k = 0; k < lk.size(); ++k) {
    row[k] = static_cast<double>(lk[k] / denom);
  }
  return row;
}

// Loss and expected counts recomputed directly from a posterior row oracle
// and the estimate. Returns (loss, E[c_n] list, E[c_0]).
struct LossRecompute {
  double loss = 0.0;
  std::vector<double> expected;
  double background = 0.0;
};

inline LossRecompute recompute_loss(const crowdcount::FrameAnnotation& frame,
                                    const crowdcount::DensityGrid& est,
                                    const crowdcount::BayesConfig& cfg) {
  const int n = frame.head_count();
  const bool bg = cfg.background_enabled;
  std::vector<long double> e(n + (bg ? 1 : 0), 0.0L);
  for (int row = 0; row < est.spec.rows; ++row) {
    for (int col = 0; col < est.spec.cols; ++col) {
      const auto x = est.spec.cell_center(col, row);
      const auto p = posterior_row(x, frame, cfg);
      const double v = est.values[est.spec.index(col, row)];
      for (std::size_t k = 0; k < p.size(); ++k) e[k] += p[k] * v;
    }
  }
  LossRecompute out;
  long double loss = 0.0L;
  for (int k = 0; k < n; ++k) {
    out.expected.push_back(static_cast<double>(e[k]));
    loss += std::abs(1.0L - e[k]);
  }
  if (bg) {
    out.background = static_cast<double>(e[n]);
    loss += std::abs(e[n]);
  }
  out.loss = static_cast<double>(loss);
  return out;
}

}  // namespace oracle
