#include <filesystem>

#include "commands.hpp"
#include "inspect/conv_denoiser.hpp"
#include "inspect/serialize.hpp"
#include "inspect/training.hpp"

namespace cli {

namespace fs = std::filesystem;

void add_train(CLI::App& app, TrainOptions& opts) {
  auto* cmd = app.add_subcommand("train", "Train the builtin denoiser");
  cmd->add_option("--config", opts.config, "Run configuration JSON")->required();
  cmd->add_option("--resume", opts.resume, "Continue from this checkpoint");
}

int run_train(const Globals& g, const TrainOptions& opts) {
  inspect::RunConfig cfg = inspect::load_run_config(opts.config);
  const std::uint64_t seed = require_seed(g, cfg.seed, "train");
  cfg.seed = seed;
  cfg.train.seed = seed;
  cfg.train.scope = cfg.scope;
  if (g.threads_given) cfg.train.threads = g.threads;

  const auto data = load_run_data(cfg);
  if (cfg.scope == inspect::StatsScope::PerClass && !data.has_labels) {
    throw UsageError("per-class statistics need labelled data");
  }
  cfg.denoiser.shape = data.shape;
  progress(g, "training on " + std::to_string(data.count()) + " images of shape " +
                  data.shape.str());

  auto set = inspect::TrainingSet::build(data.images, data.labels, cfg.scope);
  for (auto& s : set.stats) s.padding = data.padding;
  const auto schedule = inspect::make_schedule(cfg);

  inspect::CheckpointHeader header;
  header.denoiser = cfg.denoiser;
  header.steps = cfg.steps;
  header.terminal_eps = cfg.terminal_eps;
  header.objective = cfg.train.objective;

  auto denoiser = inspect::ConvDenoiser::initialised(cfg.denoiser, seed);
  int start = 0;
  if (!opts.resume.empty()) {
    auto ckpt = inspect::load_checkpoint(opts.resume);
    if (!(ckpt.header.denoiser == cfg.denoiser) || ckpt.header.steps != cfg.steps ||
        ckpt.header.objective != cfg.train.objective) {
      throw UsageError("checkpoint " + opts.resume + " does not match the run configuration");
    }
    if (ckpt.header.iteration > cfg.train.iterations) {
      throw UsageError("checkpoint is past the configured iteration count");
    }
    start = ckpt.header.iteration;
    header.history = std::move(ckpt.header.history);
    denoiser = std::move(ckpt.denoiser);
    progress(g, "resuming at iteration " + std::to_string(start));
  }

  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  const fs::path ckpt_path = out / "checkpoint.bin";
  const std::vector<double> prior = header.history;

  const auto on_checkpoint = [&](int iteration, const inspect::TrainableDenoiser&,
                                 const std::vector<double>& history) {
    header.iteration = iteration;
    header.history = prior;
    header.history.insert(header.history.end(), history.begin(), history.end());
    inspect::save_checkpoint(ckpt_path, header, denoiser);
    progress(g, "iteration " + std::to_string(iteration) + " loss " +
                    std::to_string(history.empty() ? 0.0 : history.back()));
  };
  const auto result = inspect::train_loop(cfg.train, set, schedule, denoiser, start,
                                          on_checkpoint, cfg.checkpoint_every);

  header.iteration = cfg.train.iterations;
  header.history = prior;
  header.history.insert(header.history.end(), result.history.begin(), result.history.end());
  inspect::save_checkpoint(ckpt_path, header, denoiser);
  inspect::write_loss_csv(out / "loss.csv", header.history);
  inspect::save_stats(out / "stats.json", set.stats);
  inspect::save_json(out / "schedule.json", inspect::schedule_to_json(schedule));
  inspect::save_json(out / "run.json", inspect::run_config_to_json(cfg));
  progress(g, "wrote " + ckpt_path.string());
  return kOk;
}

}  // namespace cli
