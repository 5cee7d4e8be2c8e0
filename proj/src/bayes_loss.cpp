#include "crowdcount/bayes_loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/core.h>

namespace crowdcount {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double squared_dist(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void require_grid_match(const FrameAnnotation& frame, const GridSpec& spec) {
  if (!spec.covers(frame.width, frame.height)) {
    throw std::invalid_argument(fmt::format(
        "bayes: grid {}x{} stride {} does not match frame '{}' ({}x{})",
        spec.cols, spec.rows, spec.stride, frame.frame_id, frame.width,
        frame.height));
  }
}

}  // namespace

void BayesConfig::validate() const {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        fmt::format("bayes: sigma must be positive, got {}", sigma));
  }
  if (!(d > 0.0)) {
    throw std::invalid_argument(
        fmt::format("bayes: distance ratio d must be positive, got {}", d));
  }
  if (d_mode == DistanceMode::kFractionOfMinSide && d >= 1.0) {
    throw std::invalid_argument(fmt::format(
        "bayes: d={} must be < 1 when interpreted as a fraction of the "
        "shorter image side",
        d));
  }
}

double BayesConfig::background_distance_pixels(
    const FrameAnnotation& frame) const {
  validate();
  if (d_mode == DistanceMode::kAbsolutePixels) return d;
  return d * std::min(frame.width, frame.height);
}

void PosteriorTable::validate() const {
  spec.validate();
  if (probs.size() != spec.size() * static_cast<std::size_t>(label_count())) {
    throw std::invalid_argument("posterior: table size mismatch");
  }
  const int labels = label_count();
  for (std::size_t m = 0; m < spec.size(); ++m) {
    double row_sum = 0.0;
    for (int k = 0; k < labels; ++k) {
      const double p = at(m, k);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(fmt::format(
            "posterior: entry ({}, {}) = {} outside [0, 1]", m, k, p));
      }
      row_sum += p;
    }
    // The literal background numerator deliberately breaks row sums.
    if (!literal_background_numerator && std::abs(row_sum - 1.0) > 1e-9) {
      throw std::invalid_argument(
          fmt::format("posterior: row {} sums to {}", m, row_sum));
    }
  }
}

void LossResult::validate() const {
  double expected = std::abs(expected_background);
  for (double e : expected_counts) expected += std::abs(1.0 - e);
  if (!std::isfinite(loss) || std::abs(loss - expected) > 1e-9) {
    throw std::invalid_argument(fmt::format(
        "loss: value {} inconsistent with expected counts (recomputed {})",
        loss, expected));
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) {
      throw std::invalid_argument("loss: non-finite gradient entry");
    }
  }
}

Table likelihoods(const FrameAnnotation& frame, const GridSpec& spec,
                  const BayesConfig& cfg) {
  cfg.validate();
  frame.validate();
  require_grid_match(frame, spec);
  const int heads = frame.head_count();
  if (heads < 1) {
    throw std::invalid_argument(fmt::format(
        "bayes: frame '{}' has no head points; use the background-only loss",
        frame.frame_id));
  }
  const KernelParams kernel{cfg.sigma, true, std::nullopt};
  Table table;
  table.rows = static_cast<int>(spec.size());
  table.cols = heads;
  table.data.resize(spec.size() * heads);
  for (int row = 0; row < spec.rows; ++row) {
    for (int col = 0; col < spec.cols; ++col) {
      const std::size_t m = spec.index(col, row);
      const Point center = spec.cell_center(col, row);
      for (int n = 0; n < heads; ++n) {
        table.at(m, n) = gaussian_at(center, frame.points[n], kernel);
      }
    }
  }
  return table;
}

std::optional<Point> background_point(Point x, Point z_nearest,
                                      double d_pixels) {
  if (!(d_pixels > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "bayes: background distance must be positive, got {}", d_pixels));
  }
  const double dx = x.x - z_nearest.x;
  const double dy = x.y - z_nearest.y;
  const double norm = std::hypot(dx, dy);
  if (norm == 0.0) return std::nullopt;  // direction undefined at x == z
  return Point{z_nearest.x + d_pixels * dx / norm,
               z_nearest.y + d_pixels * dy / norm};
}

double background_likelihood(Point x, const FrameAnnotation& frame,
                             const BayesConfig& cfg) {
  cfg.validate();
  if (!cfg.background_enabled) {
    throw std::invalid_argument("bayes: background modeling is disabled");
  }
  if (frame.head_count() < 1) {
    throw std::invalid_argument(fmt::format(
        "bayes: frame '{}' has no head points", frame.frame_id));
  }
  double r2 = std::numeric_limits<double>::infinity();
  for (const Point& z : frame.points) r2 = std::min(r2, squared_dist(x, z));
  const double r = std::sqrt(r2);
  const double d_pixels = cfg.background_distance_pixels(frame);
  const double s2 = cfg.sigma * cfg.sigma;
  const double delta = r - d_pixels;
  return std::exp(-delta * delta / (2.0 * s2)) /
         (2.0 * std::numbers::pi * s2);
}

PosteriorTable posterior(const FrameAnnotation& frame, const GridSpec& spec,
                         const BayesConfig& cfg) {
  cfg.validate();
  frame.validate();
  require_grid_match(frame, spec);
  const int heads = frame.head_count();
  if (heads < 1) {
    throw std::invalid_argument(fmt::format(
        "bayes: frame '{}' has no head points; use the background-only loss",
        frame.frame_id));
  }
  PosteriorTable post;
  post.spec = spec;
  post.head_count = heads;
  post.background_enabled = cfg.background_enabled;
  post.literal_background_numerator =
      cfg.background_enabled && cfg.literal_background_numerator;
  const int labels = post.label_count();
  post.probs.resize(spec.size() * labels);

  const double inv_two_s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double d_pixels =
      cfg.background_enabled ? cfg.background_distance_pixels(frame) : 0.0;
  std::vector<double> exponents(labels);

  for (int row = 0; row < spec.rows; ++row) {
    for (int col = 0; col < spec.cols; ++col) {
      const std::size_t m = spec.index(col, row);
      const Point center = spec.cell_center(col, row);
      double max_exp = -std::numeric_limits<double>::infinity();
      double min_r2 = std::numeric_limits<double>::infinity();
      int nearest = 0;
      for (int n = 0; n < heads; ++n) {
        const double r2 = squared_dist(center, frame.points[n]);
        exponents[n] = -r2 * inv_two_s2;
        max_exp = std::max(max_exp, exponents[n]);
        if (r2 < min_r2) {
          min_r2 = r2;
          nearest = n;
        }
      }
      if (cfg.background_enabled) {
        const double delta = std::sqrt(min_r2) - d_pixels;
        exponents[heads] = -delta * delta * inv_two_s2;
        max_exp = std::max(max_exp, exponents[heads]);
      }
      // Shift by the row max before exponentiating: the shared kernel
      // constant cancels and the denominator is >= 1, so no row can
      // underflow to zero.
      double denom = 0.0;
      double* out = post.probs.data() + m * labels;
      for (int k = 0; k < labels; ++k) {
        out[k] = std::exp(exponents[k] - max_exp);
        denom += out[k];
      }
      if (post.literal_background_numerator) {
        out[heads] = std::exp(exponents[nearest] - max_exp);
      }
      for (int k = 0; k < labels; ++k) out[k] /= denom;
    }
  }
  return post;
}

std::pair<std::vector<double>, double> expected_counts(
    const PosteriorTable& post, const DensityGrid& est) {
  est.validate();
  if (est.spec != post.spec) {
    throw std::invalid_argument(fmt::format(
        "bayes: posterior grid {}x{} stride {} differs from estimate grid "
        "{}x{} stride {}",
        post.spec.cols, post.spec.rows, post.spec.stride, est.spec.cols,
        est.spec.rows, est.spec.stride));
  }
  const int labels = post.label_count();
  std::vector<double> sums(labels, 0.0);
  for (std::size_t m = 0; m < est.values.size(); ++m) {  // ascending cells
    const double v = est.values[m];
    const double* row = post.probs.data() + m * labels;
    for (int k = 0; k < labels; ++k) sums[k] += row[k] * v;
  }
  double background = 0.0;
  if (post.background_enabled) {
    background = sums.back();
    sums.pop_back();
  }
  return {std::move(sums), background};
}

LossResult loss_from_posterior(const PosteriorTable& post,
                               const std::vector<double>& est_values) {
  const int labels = post.label_count();
  if (est_values.size() != post.spec.size()) {
    throw std::invalid_argument(
        fmt::format("bayes: estimate holds {} cells, posterior expects {}",
                    est_values.size(), post.spec.size()));
  }
  LossResult result;
  result.expected_counts.assign(post.head_count, 0.0);
  std::vector<double> sums(labels, 0.0);
  for (std::size_t m = 0; m < est_values.size(); ++m) {
    const double v = est_values[m];
    const double* row = post.probs.data() + m * labels;
    for (int k = 0; k < labels; ++k) sums[k] += row[k] * v;
  }
  for (int n = 0; n < post.head_count; ++n) {
    result.expected_counts[n] = sums[n];
    result.loss += std::abs(1.0 - sums[n]);
  }
  if (post.background_enabled) {
    result.expected_background = sums[post.head_count];
    result.loss += std::abs(result.expected_background);
  }

  // sign(0) = 0: the subgradient vanishes exactly at the targets.
  std::vector<double> coeff(labels);
  for (int n = 0; n < post.head_count; ++n) {
    coeff[n] = -sign(1.0 - result.expected_counts[n]);
  }
  if (post.background_enabled) {
    coeff[post.head_count] = sign(result.expected_background);
  }
  result.gradient.assign(est_values.size(), 0.0);
  for (std::size_t m = 0; m < est_values.size(); ++m) {
    const double* row = post.probs.data() + m * labels;
    double g = 0.0;
    for (int k = 0; k < labels; ++k) g += coeff[k] * row[k];
    result.gradient[m] = g;
  }
  return result;
}

LossResult bayes_loss(const FrameAnnotation& frame, const DensityGrid& est,
                      const BayesConfig& cfg) {
  cfg.validate();
  frame.validate();
  est.validate();
  require_grid_match(frame, est.spec);
  if (frame.head_count() == 0) {
    // Empty frame: everything is background with probability 1, so the
    // loss is the total estimated mass.
    LossResult result;
    result.expected_background = total_count(est);
    result.loss = std::abs(result.expected_background);
    result.gradient.assign(est.values.size(),
                           sign(result.expected_background));
    return result;
  }
  const PosteriorTable post = posterior(frame, est.spec, cfg);
  return loss_from_posterior(post, est.values);
}

}  // namespace crowdcount
