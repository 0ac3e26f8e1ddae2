#include <algorithm>
#include <cmath>
#include <filesystem>

#include "commands.hpp"
#include "inspect/parallel.hpp"
#include "inspect/serialize.hpp"
#include "inspect/spectral.hpp"
#include "inspect/stats.hpp"

namespace cli {

namespace fs = std::filesystem;
using inspect::json;

void add_analyze(CLI::App& app, AnalyzeOptions& opts) {
  auto* cmd = app.add_subcommand("analyze", "Fit spectral statistics and count invariant components");
  cmd->add_option("--data", opts.data.data, "IDX image file or image directory")->required();
  cmd->add_option("--labels", opts.data.labels, "IDX label file (guessed from --data if omitted)");
  cmd->add_option("--layout", opts.data.layout, "Directory layout: flat or per_class");
  cmd->add_option("--pad-to", opts.data.pad_to, "Zero-pad IDX images to this square size (0: off)");
  cmd->add_flag("--per-class", opts.per_class, "Also fit one entry per label");
  cmd->add_option("--threshold", opts.threshold, "Near-zero standard deviation threshold")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts.out, "Stats JSON path; CSV and summary files go next to it");
  cmd->add_option("--bins", opts.bins, "Radial profile bins")->check(CLI::Range(3, 4096));
}

namespace {

struct Group {
  std::optional<std::string> label;
  std::vector<std::size_t> members;
};

std::string class_name(const inspect::DatasetHandle& data, int label) {
  const auto distinct = data.distinct_labels();
  const auto it = std::find(distinct.begin(), distinct.end(), label);
  const auto idx = static_cast<std::size_t>(it - distinct.begin());
  return idx < data.class_names.size() ? data.class_names[idx] : std::to_string(label);
}

/// Pooled excess kurtosis of standardised components whose std exceeds the threshold.
double standardised_kurtosis(const std::vector<inspect::SpectralField>& spectra,
                             const std::vector<std::size_t>& members,
                             const inspect::ClassStats& stats, double threshold) {
  std::vector<double> z;
  for (std::size_t k = 0; k < stats.components(); ++k) {
    const double sd = std::sqrt(stats.var[k]);
    if (sd <= threshold) continue;
    for (std::size_t i : members) z.push_back((spectra[i][k] - stats.mean[k]) / sd);
  }
  if (z.size() < 4) return std::nan("");
  return inspect::excess_kurtosis(z);
}

}  // namespace

int run_analyze(const Globals& g, const AnalyzeOptions& opts) {
  if (opts.per_class && opts.data.layout == "flat" && fs::is_directory(opts.data.data)) {
    throw UsageError("--per-class needs labels; use --layout per_class for directories");
  }
  const auto data = load_dataset(opts.data);
  if (opts.per_class && !data.has_labels) {
    throw UsageError("--per-class needs a label file");
  }
  progress(g, "loaded " + std::to_string(data.count()) + " images of shape " + data.shape.str() +
                  (data.padding > 0 ? " (padded by " + std::to_string(data.padding) + ")" : ""));

  std::vector<inspect::SpectralField> spectra(data.count());
  inspect::parallel_for(data.count(), g.threads, [&](std::size_t i) {
    spectra[i] = inspect::to_spectral(data.images[i]);
  });

  std::vector<Group> groups;
  Group all;
  all.members.resize(data.count());
  for (std::size_t i = 0; i < data.count(); ++i) all.members[i] = i;
  groups.push_back(std::move(all));
  if (opts.per_class) {
    for (int label : data.distinct_labels()) {
      Group grp;
      grp.label = class_name(data, label);
      for (std::size_t i = 0; i < data.count(); ++i) {
        if (data.labels[i] == label) grp.members.push_back(i);
      }
      groups.push_back(std::move(grp));
    }
  }

  std::vector<inspect::ClassStats> stats;
  std::vector<inspect::InvarianceReport> reports;
  std::vector<std::string> names;
  std::vector<inspect::RadialProfile> profiles;
  json summary = json::array();
  const auto& shape = data.shape;
  const double k_max = std::min(shape.height, shape.width) / 2.0;

  for (const auto& grp : groups) {
    inspect::StatsAccumulator acc(shape);
    std::vector<double> mean_power(shape.size(), 0.0);
    for (std::size_t i : grp.members) {
      acc.add(spectra[i]);
      const auto p = inspect::power_spectrum(spectra[i]);
      for (std::size_t k = 0; k < p.size(); ++k) mean_power[k] += p[k];
    }
    for (double& v : mean_power) v /= static_cast<double>(grp.members.size());

    auto s = acc.finish(grp.label);
    s.padding = data.padding;
    const auto report = inspect::count_invariant(s, opts.threshold);
    const auto profile = inspect::radial_profile_of_power(mean_power, shape, opts.bins);

    json entry = {{"label", grp.label ? json(*grp.label) : json(nullptr)},
                  {"n", grp.members.size()},
                  {"components", report.total},
                  {"exact_zero", report.exact_zero},
                  {"near_zero", report.near_zero},
                  {"threshold", report.threshold}};
    try {
      const auto fit = inspect::power_law_fit(profile, 1.0, k_max);
      entry["power_law"] = {{"exponent", fit.exponent},
                            {"k_min", fit.k_min},
                            {"k_max", fit.k_max},
                            {"residual", fit.residual},
                            {"bins_used", fit.bins_used}};
    } catch (const inspect::DomainError& e) {
      entry["power_law"] = {{"error", e.what()}};
    }
    const double kurt = standardised_kurtosis(spectra, grp.members, s, opts.threshold);
    entry["excess_kurtosis"] = std::isfinite(kurt) ? json(kurt) : json(nullptr);
    summary.push_back(std::move(entry));

    progress(g, "class " + grp.label.value_or("(all)") + ": n=" +
                    std::to_string(grp.members.size()) + " near_zero=" +
                    std::to_string(report.near_zero) + "/" + std::to_string(report.total));
    names.push_back(grp.label.value_or("all"));
    profiles.push_back(profile);
    reports.push_back(report);
    stats.push_back(std::move(s));
  }

  const fs::path out(opts.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const fs::path stem = out.parent_path() / out.stem();
  inspect::save_stats(out, stats);
  inspect::write_invariance_csv(stem.string() + "_invariance.csv", stats, reports);
  inspect::write_radial_csv(stem.string() + "_radial.csv", names, profiles);
  inspect::save_json(stem.string() + "_summary.json", summary);
  return kOk;
}

}  // namespace cli
