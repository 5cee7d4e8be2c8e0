#include "crowdcount/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>

#include <fmt/core.h>

namespace crowdcount {

void FitConfig::validate() const {
  if (steps < 1) {
    throw std::invalid_argument(
        fmt::format("fit: steps must be >= 1, got {}", steps));
  }
  if (!(step_size > 0.0)) {
    throw std::invalid_argument(
        fmt::format("fit: step size must be positive, got {}", step_size));
  }
  if (record_trace_every < 1) {
    throw std::invalid_argument(fmt::format(
        "fit: record_trace_every must be >= 1, got {}", record_trace_every));
  }
  if (init == InitMode::kUniform &&
      (!std::isfinite(uniform_value) || uniform_value < 0.0)) {
    throw std::invalid_argument(fmt::format(
        "fit: uniform init value must be finite and >= 0, got {}",
        uniform_value));
  }
}

namespace {

DensityGrid initial_field(const FrameAnnotation& frame, const GridSpec& spec,
                          const BayesConfig& bayes, const FitConfig& cfg) {
  switch (cfg.init) {
    case InitMode::kZeros: {
      DensityGrid grid;
      grid.spec = spec;
      grid.values.assign(spec.size(), 0.0);
      return grid;
    }
    case InitMode::kUniform: {
      DensityGrid grid;
      grid.spec = spec;
      grid.values.assign(spec.size(), cfg.uniform_value);
      return grid;
    }
    case InitMode::kGtDensity:
      return generate_gt_density(frame, spec,
                                 KernelParams{bayes.sigma, true, std::nullopt});
  }
  throw std::invalid_argument("fit: unknown init mode");
}

// Loss evaluation that also covers empty frames (background-only).
LossResult eval_loss(const std::optional<PosteriorTable>& post,
                     const std::vector<double>& values) {
  if (post) return loss_from_posterior(*post, values);
  LossResult result;
  double mass = 0.0;
  for (double v : values) mass += v;
  result.expected_background = mass;
  result.loss = std::abs(mass);
  const double s = mass > 0.0 ? 1.0 : (mass < 0.0 ? -1.0 : 0.0);
  result.gradient.assign(values.size(), s);
  return result;
}

}  // namespace

FitTrace fit_density(const FrameAnnotation& frame, const GridSpec& spec,
                     const BayesConfig& bayes, const FitConfig& cfg) {
  cfg.validate();
  bayes.validate();
  frame.validate();

  // The posterior depends only on the annotations, not on the field being
  // fitted, so it is computed once up front.
  std::optional<PosteriorTable> post;
  if (frame.head_count() >= 1) post = posterior(frame, spec, bayes);

  DensityGrid est = initial_field(frame, spec, bayes, cfg);
  const double cell_step = cfg.step_size / static_cast<double>(spec.size());

  FitTrace trace;
  double running_total = 0.0;
  for (double v : est.values) running_total += v;

  for (int step = 0; step < cfg.steps; ++step) {
    const LossResult result = eval_loss(post, est.values);
    if (!std::isfinite(result.loss)) {
      throw std::runtime_error(fmt::format(
          "fit: non-finite loss {} at step {} on frame '{}'", result.loss,
          step, frame.frame_id));
    }
    if (step % cfg.record_trace_every == 0) {
      trace.samples.push_back({step, result.loss, running_total});
    }
    running_total = 0.0;
    for (std::size_t m = 0; m < est.values.size(); ++m) {
      est.values[m] =
          std::max(0.0, est.values[m] - cell_step * result.gradient[m]);
      running_total += est.values[m];
    }
  }
  const LossResult final_result = eval_loss(post, est.values);
  trace.samples.push_back({cfg.steps, final_result.loss, running_total});
  trace.final = std::move(est);
  return trace;
}

double finite_diff_check(const FrameAnnotation& frame, const GridSpec& spec,
                         const BayesConfig& bayes, const DensityGrid& est,
                         double h, double kink_tol) {
  if (!(h > 0.0) || !(kink_tol > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "fit: need h > 0 and kink_tol > 0, got h={} kink_tol={}", h, kink_tol));
  }
  bayes.validate();
  frame.validate();
  est.validate();
  if (!est.spec.covers(frame.width, frame.height)) {
    throw std::invalid_argument("fit: estimate grid does not match frame");
  }

  std::optional<PosteriorTable> post;
  if (frame.head_count() >= 1) post = posterior(frame, spec, bayes);
  const LossResult base = eval_loss(post, est.values);
  const int labels = post ? post->label_count() : 1;

  // Distance of each expected count from its L1 kink (1 per head, 0 for
  // background); shared by every cell.
  std::vector<double> kink_dist(labels);
  for (int n = 0; n < static_cast<int>(base.expected_counts.size()); ++n) {
    kink_dist[n] = std::abs(1.0 - base.expected_counts[n]);
  }
  kink_dist[labels - 1] = post && !post->background_enabled
                              ? std::abs(1.0 - base.expected_counts.back())
                              : std::abs(base.expected_background);

  std::vector<double> values = est.values;
  double max_err = 0.0;
  for (std::size_t m = 0; m < values.size(); ++m) {
    bool near_kink = false;
    for (int k = 0; k < labels; ++k) {
      const double p = post ? post->at(m, k) : 1.0;
      if (kink_dist[k] <= kink_tol + h * p) {
        near_kink = true;
        break;
      }
    }
    if (near_kink) continue;
    const double original = values[m];
    values[m] = original + h;
    const double loss_plus = eval_loss(post, values).loss;
    values[m] = original - h;
    const double loss_minus = eval_loss(post, values).loss;
    values[m] = original;
    const double fd = (loss_plus - loss_minus) / (2.0 * h);
    max_err = std::max(max_err, std::abs(fd - base.gradient[m]));
  }
  return max_err;
}

void write_trace_csv(const std::string& path, const FitTrace& trace) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(fmt::format("fit: cannot write '{}'", path));
  }
  out << "step,loss,total_count\n";
  for (const FitTrace::Sample& s : trace.samples) {
    out << fmt::format("{},{},{}\n", s.step, s.loss, s.total_count);
  }
}

}  // namespace crowdcount
