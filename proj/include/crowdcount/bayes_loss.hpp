#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "crowdcount/annotations.hpp"
#include "crowdcount/density.hpp"

namespace crowdcount {

enum class DistanceMode {
  kFractionOfMinSide,  // d_pixels = d * min(width, height)
  kAbsolutePixels,     // d_pixels = d
};

struct BayesConfig {
  double sigma = 8.0;  // pixels, > 0
  bool background_enabled = true;
  // Distance ratio: how far the per-cell background point sits from the
  // nearest head, along the direction toward the cell.
  double d = 0.15;
  DistanceMode d_mode = DistanceMode::kFractionOfMinSide;
  // Keep the published form of the background posterior numerator (the
  // nearest-head likelihood) instead of the Bayes-consistent background
  // likelihood. Off by default; rows do not sum to 1 in this mode.
  bool literal_background_numerator = false;

  void validate() const;
  double background_distance_pixels(const FrameAnnotation& frame) const;
};

// Dense row-major table, one row per grid cell.
struct Table {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  double at(std::size_t r, int c) const { return data[r * cols + c]; }
  double& at(std::size_t r, int c) { return data[r * cols + c]; }
};

// Per-cell label distribution p(label | cell): one column per head, plus a
// trailing background column when enabled. Rows sum to 1 unless the table
// was built with the literal background numerator.
struct PosteriorTable {
  GridSpec spec;
  int head_count = 0;
  bool background_enabled = false;
  bool literal_background_numerator = false;
  std::vector<double> probs;  // size() * label_count(), row-major

  int label_count() const { return head_count + (background_enabled ? 1 : 0); }
  double at(std::size_t cell, int label) const {
    return probs[cell * label_count() + label];
  }
  // Entry range and row sums (skipped in literal mode). Throws on violation.
  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> expected_counts;  // E[c_n], one per head
  double expected_background = 0.0;     // E[c_0], 0 when background disabled
  std::vector<double> gradient;         // d loss / d cell value, may be negative

  // Self-consistency: loss equals sum |1 - E[c_n]| + |E[c_0]| within 1e-9
  // and the gradient is finite.
  void validate() const;
};

// Head likelihoods p(cell | head) = N(cell center; head, sigma^2 I),
// normalized kernel, no truncation. Requires at least one head.
Table likelihoods(const FrameAnnotation& frame, const GridSpec& spec,
                  const BayesConfig& cfg);

// Point at distance d_pixels from z_nearest along the direction toward x.
// nullopt when x == z_nearest (direction undefined); callers then use the
// distance-form background_likelihood, which stays well defined.
std::optional<Point> background_point(Point x, Point z_nearest,
                                      double d_pixels);

// p(cell | background) via the distance form
//   exp(-(r - d_pixels)^2 / (2 sigma^2)) / (2 pi sigma^2),  r = min_n |x - z_n|,
// algebraically equal to evaluating the kernel at the explicit background
// point and finite even at r = 0.
double background_likelihood(Point x, const FrameAnnotation& frame,
                             const BayesConfig& cfg);

// Bayes-rule normalization of the likelihood rows; uniform priors cancel.
// Computed in exponent-shifted form so the normalization constant drops out
// and far-away cells cannot underflow to an all-zero row.
PosteriorTable posterior(const FrameAnnotation& frame, const GridSpec& spec,
                         const BayesConfig& cfg);

// E[c_n] = sum over cells of p(head n | cell) * est(cell); second element is
// the background count (0 when the table has no background column).
std::pair<std::vector<double>, double> expected_counts(
    const PosteriorTable& post, const DensityGrid& est);

// L1 count loss: sum_n |1 - E[c_n]| + |E[c_0]|, with the closed-form
// subgradient per cell:
//   grad(m) = sum_n -sign(1 - E[c_n]) p(y_n|x_m) + sign(E[c_0]) p(y_0|x_m)
// and sign(0) = 0, so the field is stationary exactly at the targets.
LossResult loss_from_posterior(const PosteriorTable& post,
                               const std::vector<double>& est_values);

// Full pipeline for one frame. Frames with no heads degenerate to the
// background-only term: everything is background, loss = |total mass|.
LossResult bayes_loss(const FrameAnnotation& frame, const DensityGrid& est,
                      const BayesConfig& cfg);

}  // namespace crowdcount
