#pragma once

#include <string>
#include <vector>

#include "crowdcount/bayes_loss.hpp"

namespace crowdcount {

enum class InitMode { kZeros, kUniform, kGtDensity };

struct FitConfig {
  int steps = 500;        // >= 1
  double step_size = 0.5; // > 0; applied as step_size / cell-count per cell
  InitMode init = InitMode::kZeros;
  double uniform_value = 0.0;  // cell value for kUniform
  int record_trace_every = 10;

  void validate() const;
};

struct FitTrace {
  struct Sample {
    int step = 0;
    double loss = 0.0;
    double total_count = 0.0;
  };
  std::vector<Sample> samples;  // first entry is the initial state, last the final
  DensityGrid final;
};

// Projected subgradient descent on the density field:
//   est <- max(0, est - (step_size / M) * gradient)
// with M the cell count, so step_size is grid-resolution independent. The
// posterior is fixed by the annotations and computed once. Deterministic
// given the configs; throws std::runtime_error on a non-finite loss.
FitTrace fit_density(const FrameAnnotation& frame, const GridSpec& spec,
                     const BayesConfig& bayes, const FitConfig& cfg);

// Max over cells of |analytic subgradient - central finite difference| of
// the loss, h the difference step. Cells whose perturbation can reach an L1
// kink within kink_tol are skipped; returns 0 when every cell is skipped
// (e.g. at exact targets).
double finite_diff_check(const FrameAnnotation& frame, const GridSpec& spec,
                         const BayesConfig& bayes, const DensityGrid& est,
                         double h, double kink_tol);

// CSV with a "step,loss,total_count" header.
void write_trace_csv(const std::string& path, const FitTrace& trace);

}  // namespace crowdcount
