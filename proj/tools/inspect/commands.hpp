#pragma once

#include <optional>
#include <string>

#include <CLI11.hpp>

#include "common.hpp"

namespace cli {

struct AnalyzeOptions {
  DataOptions data;
  bool per_class = false;
  double threshold = 1e-3;
  std::string out = "stats.json";
  int bins = 16;
};

struct TrainOptions {
  std::string config;
  std::string resume;
};

/// Unset optionals fall back to the config file (if any), then to defaults.
struct SampleOptions {
  std::string config;
  std::optional<std::string> stats;
  std::optional<std::string> ckpt;
  std::optional<int> n;
  std::optional<std::string> label;
  std::optional<int> steps;
  bool trajectory = false;
  std::optional<std::string> baseline;
  std::optional<std::string> out;
};

struct VerifyOptions {
  std::string suite = "all";
  std::string out;  ///< JSON-lines file; stdout when empty
};

void add_analyze(CLI::App& app, AnalyzeOptions& opts);
void add_train(CLI::App& app, TrainOptions& opts);
void add_sample(CLI::App& app, SampleOptions& opts);
void add_verify(CLI::App& app, VerifyOptions& opts);

int run_analyze(const Globals& g, const AnalyzeOptions& opts);
int run_train(const Globals& g, const TrainOptions& opts);
int run_sample(const Globals& g, const SampleOptions& opts);
int run_verify(const Globals& g, const VerifyOptions& opts);

}  // namespace cli
