#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inspect/conv_denoiser.hpp"
#include "inspect/io.hpp"
#include "inspect/schedule.hpp"
#include "inspect/stats.hpp"
#include "inspect/training.hpp"
#include "inspect/verify.hpp"

namespace inspect {

using json = nlohmann::json;

json schedule_to_json(const NoiseSchedule& schedule);
/// Accepts {"alpha": [...]} (alpha_bar, if present, must agree to 1e-12).
NoiseSchedule schedule_from_json(const json& j);

json stats_to_json(const ClassStats& stats);
ClassStats stats_from_json(const json& j);

/// A stats file holds one object or an array of objects.
void save_stats(const std::filesystem::path& path, const std::vector<ClassStats>& stats);
std::vector<ClassStats> load_stats(const std::filesystem::path& path);
/// Entry whose label equals `label` (nullopt selects the unlabelled one).
const ClassStats& find_stats(const std::vector<ClassStats>& all,
                             const std::optional<std::string>& label);

json report_to_json(const OracleReport& report);

struct CheckpointHeader {
  ConvDenoiserConfig denoiser;
  int iteration = 0;          ///< iterations completed
  int steps = 0;              ///< T of the training schedule
  double terminal_eps = kDefaultTerminalEps;
  Objective objective = Objective::Inspect;
  std::vector<double> history;
};

/// "INSPCKPT", u64 LE header length, JSON header, then f64 LE parameters.
void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const ConvDenoiser& denoiser);
struct Checkpoint {
  CheckpointHeader header;
  ConvDenoiser denoiser;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Fully-resolved parameters of a run. Unknown keys are rejected.
struct RunConfig {
  std::string schedule = "cosine";
  int steps = 1000;
  double terminal_eps = kDefaultTerminalEps;
  StatsScope scope = StatsScope::Global;

  // Data: an IDX pair or an image directory.
  std::string images;
  std::string labels;
  std::string image_dir;
  DirLayout layout = DirLayout::Flat;
  int pad_to = 32;
  std::optional<int> label;  ///< keep only this class
  std::size_t limit = 0;     ///< 0 keeps all

  TrainConfig train;
  int checkpoint_every = 0;
  ConvDenoiserConfig denoiser;

  // Sampling inputs.
  std::string stats_file;
  std::string checkpoint;
  std::optional<std::string> sample_label;
  int sample_steps = 0;  ///< 0 uses the checkpoint's T
  bool trajectory = false;
  Objective sampler = Objective::Inspect;

  int sample_count = 64;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
};

json run_config_to_json(const RunConfig& config);
/// Throws FormatError on unknown keys or bad types.
RunConfig run_config_from_json(const json& j);
/// Reads a config file; relative paths are resolved against its directory
/// and must exist. Throws IoError when they do not.
RunConfig load_run_config(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);
json load_json(const std::filesystem::path& path);

NoiseSchedule make_schedule(const RunConfig& config);

void write_invariance_csv(const std::filesystem::path& path,
                          const std::vector<ClassStats>& stats,
                          const std::vector<InvarianceReport>& reports);
void write_radial_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                      const std::vector<RadialProfile>& profiles);
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& history,
                    int first_iteration = 0);
std::vector<double> read_loss_csv(const std::filesystem::path& path);

}  // namespace inspect
