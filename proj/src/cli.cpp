#include "crowdcount/cli.hpp"

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "crowdcount/annotations.hpp"
#include "crowdcount/bayes_loss.hpp"
#include "crowdcount/density.hpp"
#include "crowdcount/detect_count.hpp"
#include "crowdcount/evalreport.hpp"
#include "crowdcount/fit.hpp"
#include "crowdcount/image.hpp"

namespace crowdcount {
namespace {

const FrameAnnotation& select_frame(const std::vector<FrameAnnotation>& frames,
                                    const std::string& wanted,
                                    const std::string& path) {
  if (wanted.empty()) {
    if (frames.size() == 1) return frames.front();
    std::string ids;
    for (const FrameAnnotation& f : frames) {
      ids += ids.empty() ? f.frame_id : ", " + f.frame_id;
    }
    throw std::invalid_argument(
        fmt::format("'{}' holds {} frames; pick one with --frame (ids: {})",
                    path, frames.size(), ids));
  }
  for (const FrameAnnotation& f : frames) {
    if (f.frame_id == wanted) return f;
  }
  throw std::invalid_argument(
      fmt::format("'{}' has no frame '{}'", path, wanted));
}

InitMode parse_init(const std::string& name) {
  if (name == "zeros") return InitMode::kZeros;
  if (name == "uniform") return InitMode::kUniform;
  if (name == "gt") return InitMode::kGtDensity;
  throw std::invalid_argument(fmt::format(
      "--init must be one of zeros, uniform, gt; got '{}'", name));
}

struct BayesFlags {
  double sigma = 8.0;
  bool no_background = false;
  double d = 0.15;
  bool d_pixels = false;
  bool literal_numerator = false;

  void attach(CLI::App* sub) {
    sub->add_option("--sigma", sigma, "Gaussian kernel sigma in pixels")
        ->capture_default_str();
    sub->add_flag("--no-background", no_background,
                  "Disable the background label");
    sub->add_option("--d", d,
                    "Background point distance (fraction of the shorter "
                    "image side unless --d-pixels)")
        ->capture_default_str();
    sub->add_flag("--d-pixels", d_pixels,
                  "Interpret --d as absolute pixels instead of a fraction");
    sub->add_flag("--literal-background-numerator", literal_numerator,
                  "Use the nearest-head likelihood as the background "
                  "posterior numerator (rows then no longer sum to 1)");
  }

  BayesConfig config() const {
    BayesConfig cfg;
    cfg.sigma = sigma;
    cfg.background_enabled = !no_background;
    cfg.d = d;
    cfg.d_mode = d_pixels ? DistanceMode::kAbsolutePixels
                          : DistanceMode::kFractionOfMinSide;
    cfg.literal_background_numerator = literal_numerator;
    return cfg;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Crowd-density toolkit: ground-truth density maps, a Bayesian "
      "count loss with background modeling, density-field fitting, "
      "detection counting, and count-comparison reports.",
      "crowdcount"};
  app.require_subcommand(1);

  // gen-density
  auto* gen = app.add_subcommand(
      "gen-density", "Write a ground-truth density raster for one frame");
  std::string gen_ann, gen_frame, gen_out;
  double gen_sigma = 8.0;
  double gen_stride = 1.0;
  bool gen_unnorm = false;
  std::optional<double> gen_trunc;
  gen->add_option("--annotations", gen_ann, "Annotations JSON")->required();
  gen->add_option("--frame", gen_frame,
                  "Frame id (optional when the file holds one frame)");
  gen->add_option("--sigma", gen_sigma, "Gaussian kernel sigma in pixels")
      ->capture_default_str();
  gen->add_option("--stride", gen_stride, "Cell size in pixels")
      ->capture_default_str();
  gen->add_flag("--unnormalized", gen_unnorm,
                "Drop the Gaussian normalization constant");
  gen->add_option("--truncation", gen_trunc,
                  "Zero the kernel beyond this many sigmas");
  gen->add_option("--out", gen_out, "Output density raster")->required();

  // loss
  auto* loss = app.add_subcommand(
      "loss", "Evaluate the count loss of an estimated density raster");
  std::string loss_ann, loss_frame, loss_est;
  BayesFlags loss_bayes;
  loss->add_option("--annotations", loss_ann, "Annotations JSON")->required();
  loss->add_option("--frame", loss_frame,
                   "Frame id (optional when the file holds one frame)");
  loss->add_option("--est", loss_est, "Estimated density raster")->required();
  loss_bayes.attach(loss);

  // fit
  auto* fit = app.add_subcommand(
      "fit", "Fit a density field to one frame by projected subgradient "
             "descent");
  std::string fit_ann, fit_frame, fit_out, fit_trace, fit_init = "zeros";
  double fit_stride = 1.0;
  BayesFlags fit_bayes;
  int fit_steps = 500, fit_record = 10;
  double fit_step_size = 0.5, fit_uniform = 0.0;
  fit->add_option("--annotations", fit_ann, "Annotations JSON")->required();
  fit->add_option("--frame", fit_frame,
                  "Frame id (optional when the file holds one frame)");
  fit->add_option("--stride", fit_stride, "Cell size in pixels")
      ->capture_default_str();
  fit_bayes.attach(fit);
  fit->add_option("--steps", fit_steps, "Descent steps")
      ->capture_default_str();
  fit->add_option("--step-size", fit_step_size,
                  "Step size (scaled by 1/cell-count per cell)")
      ->capture_default_str();
  fit->add_option("--init", fit_init, "Initial field: zeros, uniform, or gt")
      ->capture_default_str();
  fit->add_option("--uniform-value", fit_uniform,
                  "Per-cell value for --init uniform")
      ->capture_default_str();
  fit->add_option("--record-every", fit_record, "Trace sampling interval")
      ->capture_default_str();
  fit->add_option("--trace", fit_trace, "Trace CSV path (optional)");
  fit->add_option("--out", fit_out, "Final density raster")->required();

  // count-detections
  auto* cnt = app.add_subcommand(
      "count-detections", "Count person detections above a score threshold");
  std::vector<std::string> cnt_paths;
  double cnt_threshold = 0.5;
  cnt->add_option("--detections", cnt_paths, "Detection JSON files")
      ->required();
  cnt->add_option("--threshold", cnt_threshold, "Minimum detection score")
      ->capture_default_str();

  // render
  auto* render = app.add_subcommand(
      "render", "Overlay a density raster on an image via the red channel");
  std::string render_density, render_image, render_out;
  render->add_option("--density", render_density, "Density raster")
      ->required();
  render->add_option("--image", render_image,
                     "Base PNG (defaults to black at the raster's size)");
  render->add_option("--out", render_out, "Output PNG")->required();

  // report
  auto* report = app.add_subcommand(
      "report", "Build the count-comparison report from a counts CSV");
  std::string report_counts, report_md, report_json;
  report->add_option("--counts", report_counts,
                     "CSV scenario,method,estimated,ground_truth")
      ->required();
  report->add_option("--out-md", report_md,
                     "Markdown output path (stdout when omitted)");
  report->add_option("--out-json", report_json, "JSON output path (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (gen->parsed()) {
      const auto frames = load_annotations(gen_ann);
      const FrameAnnotation& frame = select_frame(frames, gen_frame, gen_ann);
      KernelParams params;
      params.sigma = gen_sigma;
      params.normalized = !gen_unnorm;
      params.truncation_radius = gen_trunc;
      const GridSpec spec = GridSpec::for_frame(frame, gen_stride);
      const DensityGrid grid = generate_gt_density(frame, spec, params);
      write_raster(gen_out, grid);
      out << fmt::format(
          "gen-density: frame '{}', {}x{} cells, total count {}\n",
          frame.frame_id, spec.cols, spec.rows, total_count(grid));
    } else if (loss->parsed()) {
      const auto frames = load_annotations(loss_ann);
      const FrameAnnotation& frame =
          select_frame(frames, loss_frame, loss_ann);
      const DensityGrid est = read_raster(loss_est);
      const LossResult result = bayes_loss(frame, est, loss_bayes.config());
      nlohmann::ordered_json doc;
      doc["loss"] = result.loss;
      doc["expected_counts"] = result.expected_counts;
      doc["expected_background"] = result.expected_background;
      out << doc.dump() << "\n";
    } else if (fit->parsed()) {
      const auto frames = load_annotations(fit_ann);
      const FrameAnnotation& frame = select_frame(frames, fit_frame, fit_ann);
      FitConfig cfg;
      cfg.steps = fit_steps;
      cfg.step_size = fit_step_size;
      cfg.init = parse_init(fit_init);
      cfg.uniform_value = fit_uniform;
      cfg.record_trace_every = fit_record;
      const GridSpec spec = GridSpec::for_frame(frame, fit_stride);
      const FitTrace trace =
          fit_density(frame, spec, fit_bayes.config(), cfg);
      if (!fit_trace.empty()) write_trace_csv(fit_trace, trace);
      write_raster(fit_out, trace.final);
      out << fmt::format("fit: frame '{}', {} steps, final loss {}, total "
                         "count {}\n",
                         frame.frame_id, cfg.steps,
                         trace.samples.back().loss,
                         trace.samples.back().total_count);
    } else if (cnt->parsed()) {
      out << "id,count\n";
      for (const std::string& path : cnt_paths) {
        for (const DetectionSet& set : load_detections(path)) {
          out << fmt::format("{},{}\n", set.frame_id,
                             count_persons(set, cnt_threshold));
        }
      }
    } else if (render->parsed()) {
      const DensityGrid grid = read_raster(render_density);
      ImageRGB base =
          render_image.empty()
              ? ImageRGB::filled(grid.spec.cols * grid.spec.stride,
                                 grid.spec.rows * grid.spec.stride, 0, 0, 0)
              : read_png(render_image);
      const ImageRGB overlay = render_overlay(base, grid);
      write_png(render_out, overlay);
      out << fmt::format("render: {}x{} overlay written to '{}'\n",
                         overlay.width, overlay.height, render_out);
    } else if (report->parsed()) {
      const ScenarioReport rep = build_report(load_counts_csv(report_counts));
      const std::string markdown = render_markdown(rep);
      if (report_md.empty()) {
        out << markdown;
      } else {
        std::ofstream file(report_md);
        if (!file) {
          throw std::runtime_error(
              fmt::format("report: cannot write '{}'", report_md));
        }
        file << markdown;
      }
      if (!report_json.empty()) {
        std::ofstream file(report_json);
        if (!file) {
          throw std::runtime_error(
              fmt::format("report: cannot write '{}'", report_json));
        }
        file << report_to_json(rep);
      }
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace crowdcount
