#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "inspect/diffusion.hpp"
#include "inspect/serialize.hpp"
#include "inspect/spectral.hpp"
#include "inspect/verify.hpp"

namespace cli {

namespace fs = std::filesystem;
using inspect::json;

void add_sample(CLI::App& app, SampleOptions& opts) {
  auto* cmd = app.add_subcommand("sample", "Generate images with a trained denoiser");
  cmd->add_option("--config", opts.config, "Run configuration JSON (sample section)");
  cmd->add_option("--stats", opts.stats, "Stats JSON written by analyze or train");
  cmd->add_option("--ckpt", opts.ckpt, "Checkpoint written by train");
  cmd->add_option("--n", opts.n, "Number of samples")->check(CLI::PositiveNumber);
  cmd->add_option("--label", opts.label, "Use the stats entry with this label");
  cmd->add_option("--steps", opts.steps, "Sampling steps (default: the checkpoint's T)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--trajectory", opts.trajectory, "Also write intermediate states");
  cmd->add_option("--baseline", opts.baseline, "Sampler: inspect or ddpm");
  cmd->add_option("--out", opts.out, "Output directory");
}

namespace {

std::string numbered(const char* prefix, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, i, ext);
  return buf;
}

std::string absolute(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

}  // namespace

int run_sample(const Globals& g, const SampleOptions& opts) {
  inspect::RunConfig cfg;
  cfg.output_dir = "samples";
  if (!opts.config.empty()) cfg = inspect::load_run_config(opts.config);
  if (opts.stats) cfg.stats_file = absolute(*opts.stats);
  if (opts.ckpt) cfg.checkpoint = absolute(*opts.ckpt);
  if (opts.n) cfg.sample_count = *opts.n;
  if (opts.label) cfg.sample_label = *opts.label;
  if (opts.steps) cfg.sample_steps = *opts.steps;
  if (opts.trajectory) cfg.trajectory = true;
  if (opts.out) cfg.output_dir = absolute(*opts.out);
  if (opts.baseline) {
    if (*opts.baseline == "inspect") {
      cfg.sampler = inspect::Objective::Inspect;
    } else if (*opts.baseline == "ddpm") {
      cfg.sampler = inspect::Objective::Ddpm;
    } else {
      throw UsageError("--baseline must be inspect or ddpm");
    }
  }
  if (cfg.checkpoint.empty()) throw UsageError("sample: --ckpt is required");
  const bool ddpm = cfg.sampler == inspect::Objective::Ddpm;
  if (cfg.stats_file.empty() && !ddpm) throw UsageError("sample: --stats is required");
  const std::uint64_t seed = require_seed(g, cfg.seed, "sample");
  cfg.seed = seed;
  const int threads = g.threads_given ? g.threads : cfg.train.threads;

  const auto ckpt = inspect::load_checkpoint(cfg.checkpoint);
  std::optional<inspect::ClassStats> stats;
  if (!cfg.stats_file.empty()) {
    stats = inspect::find_stats(inspect::load_stats(cfg.stats_file), cfg.sample_label);
    if (!(stats->shape == ckpt.header.denoiser.shape)) {
      throw inspect::ShapeError("stats shape " + stats->shape.str() +
                                " does not match checkpoint shape " +
                                ckpt.header.denoiser.shape.str());
    }
  }
  const int steps = cfg.sample_steps > 0 ? cfg.sample_steps : ckpt.header.steps;
  const auto schedule = inspect::cosine_schedule(steps, ckpt.header.terminal_eps);
  if (ckpt.header.objective != cfg.sampler) {
    progress(g, "warning: checkpoint was trained for the other sampler");
  }

  inspect::SampleOptions sopts;
  sopts.record_trajectory = cfg.trajectory;
  const int n = cfg.sample_count;

  std::vector<inspect::PixelField> images;
  std::vector<std::vector<std::pair<int, inspect::SpectralField>>> frames(n);
  progress(g, "sampling " + std::to_string(n) + " images with T=" + std::to_string(steps));
  if (ddpm) {
    auto results = inspect::ddpm_sample_batch(ckpt.denoiser, ckpt.header.denoiser.shape,
                                              schedule, seed, n, threads, sopts);
    for (int i = 0; i < n; ++i) {
      auto& r = results[i];
      for (std::size_t f = 0; f < r.frames.size(); ++f) {
        frames[i].emplace_back(r.frame_steps[f], inspect::to_spectral(r.frames[f]));
      }
      images.push_back(std::move(r.image));
    }
  } else {
    auto results = inspect::sample_batch(ckpt.denoiser, *stats, schedule, seed, n, threads, sopts);
    for (int i = 0; i < n; ++i) {
      auto& r = results[i];
      for (auto& f : r.frames) frames[i].emplace_back(f.t, std::move(f.state));
      images.push_back(std::move(r.image));
    }
  }

  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  const char* ext = ckpt.header.denoiser.shape.channels == 3 ? "ppm" : "pgm";
  json manifest;
  manifest["sampler"] = ddpm ? "ddpm" : "inspect";
  manifest["seed"] = seed;
  manifest["steps"] = steps;
  manifest["label"] = cfg.sample_label ? json(*cfg.sample_label) : json(nullptr);
  json list = json::array();
  json trajectories = json::array();
  for (int i = 0; i < n; ++i) {
    const std::string name = numbered("sample", i, ext);
    inspect::write_pnm(out / name, images[i]);
    list.push_back(name);
    if (!cfg.trajectory) continue;
    const auto target = inspect::to_spectral(images[i]);
    const fs::path dir = out / numbered("trajectory", i, "d");
    fs::create_directories(dir);
    json entries = json::array();
    for (const auto& [t, state] : frames[i]) {
      const std::string file = numbered("step", t, ext);
      inspect::write_pnm(dir / file, inspect::to_pixel(state));
      entries.push_back({{"step", t},
                         {"file", (dir.filename() / file).generic_string()},
                         {"spectral_l2_to_target",
                          inspect::l2_distance(state.values(), target.values())}});
    }
    trajectories.push_back(std::move(entries));
  }
  manifest["images"] = std::move(list);
  if (cfg.trajectory) manifest["trajectories"] = std::move(trajectories);
  if (stats && n >= 32) {
    manifest["spectral_moment_distance"] = inspect::spectral_moment_distance(images, *stats);
  }
  inspect::save_json(out / "manifest.json", manifest);
  inspect::save_json(out / "run.json", inspect::run_config_to_json(cfg));
  progress(g, "wrote " + std::to_string(n) + " images to " + out.string());
  return kOk;
}

}  // namespace cli
