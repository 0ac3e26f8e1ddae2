#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "inspect/io.hpp"
#include "inspect/serialize.hpp"

namespace cli {

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool threads_given = false;
  bool quiet = false;
};

/// Thrown for bad argument combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string data;        ///< IDX image file or image directory
  std::string labels;      ///< IDX label file; guessed from the image name if empty
  std::string layout = "flat";
  int pad_to = -1;         ///< -1: pad IDX images to 32 when they fit, 0: never
};

inspect::DatasetHandle load_dataset(const DataOptions& opts);

/// Label file next to an IDX image file ("...images-idx3..." -> "...labels-idx1...").
std::optional<std::filesystem::path> guess_label_file(const std::filesystem::path& images);

void progress(const Globals& g, const std::string& message);

/// --seed, else the config's seed; UsageError when neither is set.
std::uint64_t require_seed(const Globals& g, const std::optional<std::uint64_t>& fallback,
                           const char* command);

/// Images of a run config's data section, filtered by label and limit.
inspect::DatasetHandle load_run_data(const inspect::RunConfig& config);

}  // namespace cli
