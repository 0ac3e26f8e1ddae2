#include "common.hpp"

#include <iostream>

#include "inspect/errors.hpp"

namespace cli {

namespace fs = std::filesystem;

std::optional<fs::path> guess_label_file(const fs::path& images) {
  std::string name = images.filename().string();
  const auto pos = name.find("images-idx3");
  if (pos == std::string::npos) return std::nullopt;
  name.replace(pos, 11, "labels-idx1");
  const fs::path candidate = images.parent_path() / name;
  if (fs::exists(candidate)) return candidate;
  return std::nullopt;
}

inspect::DatasetHandle load_dataset(const DataOptions& opts) {
  const fs::path path(opts.data);
  if (fs::is_directory(path)) {
    inspect::DirLayout layout;
    if (opts.layout == "flat") {
      layout = inspect::DirLayout::Flat;
    } else if (opts.layout == "per_class") {
      layout = inspect::DirLayout::PerClassSubdirs;
    } else {
      throw UsageError("--layout must be flat or per_class");
    }
    return inspect::load_image_dir(path, layout);
  }
  fs::path labels = opts.labels;
  if (labels.empty()) {
    if (auto guess = guess_label_file(path)) labels = *guess;
  }
  int pad = opts.pad_to;
  if (pad < 0) {
    // Read once unpadded to learn the size, then decide.
    const auto probe = inspect::load_idx(path, labels, 0);
    const int h = probe.shape.height, w = probe.shape.width;
    if (h <= 32 && w <= 32 && (32 - h) % 2 == 0 && (32 - w) % 2 == 0 && (h != 32 || w != 32)) {
      return inspect::load_idx(path, labels, 32);
    }
    return probe;
  }
  return inspect::load_idx(path, labels, pad);
}

void progress(const Globals& g, const std::string& message) {
  if (!g.quiet) std::cerr << message << '\n';
}

std::uint64_t require_seed(const Globals& g, const std::optional<std::uint64_t>& fallback,
                           const char* command) {
  if (g.seed) return *g.seed;
  if (fallback) return *fallback;
  throw UsageError(std::string(command) + ": --seed is required");
}

inspect::DatasetHandle load_run_data(const inspect::RunConfig& config) {
  inspect::DatasetHandle data;
  if (!config.images.empty()) {
    data = inspect::load_idx(config.images, config.labels, config.pad_to);
  } else if (!config.image_dir.empty()) {
    data = inspect::load_image_dir(config.image_dir, config.layout);
  } else {
    throw UsageError("config.data needs images or image_dir");
  }
  if (config.label) {
    if (!data.has_labels) throw UsageError("config.data.label set but the data has no labels");
    std::vector<inspect::PixelField> kept;
    for (std::size_t i = 0; i < data.count(); ++i) {
      if (data.labels[i] == *config.label) kept.push_back(std::move(data.images[i]));
    }
    if (kept.empty()) {
      throw inspect::DomainError("no images with label " + std::to_string(*config.label));
    }
    data.images = std::move(kept);
    data.labels.assign(data.images.size(), *config.label);
  }
  if (config.limit > 0 && data.count() > config.limit) {
    data.images.resize(config.limit);
    if (data.has_labels) data.labels.resize(config.limit);
  }
  return data;
}

}  // namespace cli
