#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>

#include "commands.hpp"
#include "inspect/rng.hpp"
#include "inspect/serialize.hpp"
#include "inspect/verify.hpp"

namespace cli {

using inspect::json;
using inspect::OracleReport;

void add_verify(CLI::App& app, VerifyOptions& opts) {
  auto* cmd = app.add_subcommand("verify", "Run the oracle checks and print JSON lines");
  cmd->add_option("--suite", opts.suite, "Suite to run")
      ->check(CLI::IsMember({"all", "forward", "posterior", "terminal", "drift"}));
  cmd->add_option("--out", opts.out, "Write the report here instead of stdout");
}

namespace {

using Emit = std::function<void(const char* suite, const OracleReport&)>;

void forward_suite(std::uint64_t seed, const Emit& emit) {
  const inspect::NoiseSchedule flat(std::vector<double>(500, 0.99));
  emit("forward", inspect::mc_forward_consistency(flat, 0.5, 2.0, 1.0, 100000, {10, 100, 500},
                                                  inspect::Rng::derive(seed, "forward").next_u64()));
  emit("forward", inspect::mc_forward_consistency(flat, 0.5, 0.0, 1.0, 1000, {10, 100, 500},
                                                  seed, 1e-12));
  const auto cosine = inspect::cosine_schedule(500);
  emit("forward", inspect::mc_forward_consistency(cosine, -0.25, 0.5, 2.0, 100000,
                                                  {1, 50, 250, 499},
                                                  inspect::Rng::derive(seed, "forward", 1).next_u64()));
}

/// The quadrature oracle at every t >= 2 of the default schedule, one draw per t.
OracleReport default_schedule_posterior(std::uint64_t seed) {
  const auto schedule = inspect::cosine_schedule(1000);
  auto rng = inspect::Rng::derive(seed, "verify/default-schedule");
  OracleReport worst;
  worst.check = "posterior_default_schedule";
  double max_disc = 0.0;
  int worst_t = 0;
  std::size_t points = 0;
  bool all_pass = true;
  for (int t = 2; t <= schedule.steps(); ++t) {
    const double mu = 2.0 * rng.uniform() - 1.0;
    const double var = 0.05 + 2.0 * rng.uniform();
    const double x0 = mu + 2.0 * (2.0 * rng.uniform() - 1.0);
    const double xt = mu + 2.0 * (2.0 * rng.uniform() - 1.0);
    const auto r = inspect::posterior_bayes_oracle(schedule.alpha(t), schedule.alpha_bar(t - 1),
                                                   mu, var, x0, xt);
    points += r.samples;
    all_pass = all_pass && r.pass;
    if (r.discrepancy >= max_disc) {
      max_disc = r.discrepancy;
      worst_t = t;
    }
  }
  worst.params = {{"T", schedule.steps()}, {"worst_t", worst_t}};
  worst.samples = points;
  worst.set_result(max_disc, 1e-6);
  worst.pass = worst.pass && all_pass;
  return worst;
}

void posterior_suite(std::uint64_t seed, const Emit& emit) {
  emit("posterior", inspect::posterior_bayes_oracle(0.8, 0.9, 0.5, 2.0, 1.0, 0.7));
  emit("posterior", inspect::posterior_bayes_oracle(0.8, 0.9, 0.0, 1.0, 1.0, 0.7, 20000,
                                                    inspect::PosteriorReference::Ddpm));
  emit("posterior", default_schedule_posterior(seed));
  emit("posterior", inspect::posterior_oracle_sweep(1000, seed));
  emit("posterior", inspect::coefficient_identity_sweep(10000, seed));
  emit("posterior", inspect::ddpm_reduction_check(inspect::cosine_schedule(1000),
                                                  inspect::Shape{1, 8, 8}, seed));
}

inspect::ClassStats synthetic_stats(const inspect::Shape& shape, std::uint64_t seed) {
  auto rng = inspect::Rng::derive(seed, "verify/synthetic-stats");
  inspect::ClassStats st;
  st.label = "synthetic";
  st.shape = shape;
  st.count = 1000;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    st.mean.push_back(rng.normal());
    st.var.push_back(k % 11 == 0 ? 0.0 : 0.05 + 2.0 * rng.uniform());
  }
  return st;
}

void terminal_suite(std::uint64_t seed, const Emit& emit) {
  const auto st = synthetic_stats(inspect::Shape{1, 16, 16}, seed);
  emit("terminal", inspect::terminal_law_check(st, inspect::cosine_schedule(1000), 100000, seed));
}

void drift_suite(const Emit& emit) {
  const auto cosine = inspect::cosine_schedule(1000);
  emit("drift", inspect::drift_identity_check(cosine));
  emit("drift", inspect::drift_convergence_check(
                    inspect::DriftSequence::mean_reverting(cosine), cosine, 1000));
  const inspect::NoiseSchedule flat(std::vector<double>(10000, 0.99));
  emit("drift", inspect::drift_convergence_check(inspect::DriftSequence::geometric(10000, 0.1, 0.9),
                                                 flat, 10000));
  emit("drift", inspect::drift_convergence_check(inspect::DriftSequence::constant(1000, 0.01),
                                                 cosine, 1000));
}

}  // namespace

int run_verify(const Globals& g, const VerifyOptions& opts) {
  const std::uint64_t seed = g.seed.value_or(20240521);
  std::ofstream file;
  if (!opts.out.empty()) {
    file.open(opts.out);
    if (!file) throw inspect::IoError("cannot write " + opts.out);
  }
  std::ostream& os = opts.out.empty() ? std::cout : file;

  int failures = 0;
  const Emit emit = [&](const char* suite, const OracleReport& r) {
    json j = inspect::report_to_json(r);
    j["suite"] = suite;
    os << j.dump() << '\n';
    os.flush();
    if (!r.pass) ++failures;
    progress(g, std::string(r.pass ? "PASS " : "FAIL ") + suite + "/" + r.check);
  };

  const auto want = [&](const char* s) { return opts.suite == "all" || opts.suite == s; };
  if (want("forward")) forward_suite(seed, emit);
  if (want("posterior")) posterior_suite(seed, emit);
  if (want("terminal")) terminal_suite(seed, emit);
  if (want("drift")) drift_suite(emit);
  return failures == 0 ? kOk : kCheckFailed;
}

}  // namespace cli
