// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../oracles/direct_dft.hpp"
#include "inspect/conv_denoiser.hpp"
#include "inspect/diffusion.hpp"
#include "inspect/io.hpp"
#include "inspect/rng.hpp"
#include "inspect/schedule.hpp"
#include "inspect/spectral.hpp"
#include "inspect/stats.hpp"
#include "inspect/training.hpp"
#include "inspect/verify.hpp"

using namespace inspect;

namespace {

constexpr std::uint64_t kSeed = 20240521;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Mnist {
  DatasetHandle data;
  std::vector<PixelField> digit(int d) const { return data.with_label(d); }
};

const Mnist& mnist(const std::string& dir) {
  static const Mnist m{load_idx(dir + "/mnist5k-images-idx3-ubyte.gz",
                                dir + "/mnist5k-labels-idx1-ubyte.gz", 32)};
  return m;
}

ClassStats stats_of(const std::vector<PixelField>& images, std::optional<std::string> label) {
  std::vector<SpectralField> spectra;
  spectra.reserve(images.size());
  for (const auto& img : images) spectra.push_back(to_spectral(img));
  auto s = fit_class_stats(spectra, std::move(label));
  s.padding = 2;
  return s;
}

Outcome forward_composition() {
  const auto r = mc_forward_consistency(cosine_schedule(500), 2.0, 1.0, -1.0, 100000,
                                        {10, 100, 250, 500}, kSeed, 0.01);
  return {r.pass, fmt("cosine T=500, 1e5 paths, worst relative moment error %.4g (tol 0.01)",
                      r.discrepancy)};
}

Outcome posterior_correctness() {
  const auto worked = posterior_bayes_oracle(0.8, 0.9, 0.5, 2.0, 1.0, 0.7);
  double mean = 0, var = 0;
  for (const auto& [k, v] : worked.params) {
    if (k == "closed_mean") mean = v;
    if (k == "closed_var") var = v;
  }
  const bool worked_ok = worked.pass && std::abs(mean - 0.902704) <= 1e-6 &&
                         std::abs(var - 0.142857) <= 1e-6;
  const auto sweep = posterior_oracle_sweep(1000, kSeed, 1e-6);
  return {worked_ok && sweep.pass,
          fmt("worked case mean %.7f var %.7f; 1000 draws worst |diff| %.3g (tol 1e-6)", mean, var,
              sweep.discrepancy)};
}

Outcome coefficient_identities() {
  const auto r = coefficient_identity_sweep(10000, kSeed, 1e-12);
  double g1 = -1;
  for (const auto& [k, v] : r.params) {
    if (k == "max_abs_gamma1_beta_hat1") g1 = v;
  }
  return {r.pass && g1 == 0.0,
          fmt("1e4 (schedule, t) pairs, worst identity error %.3g (tol 1e-12); |gamma_1|+|beta_hat_1| = %g",
              r.discrepancy, g1)};
}

Outcome terminal_law() {
  const Shape shape{1, 16, 16};
  Rng rng = Rng::derive(kSeed, "acceptance/terminal-stats");
  ClassStats st;
  st.shape = shape;
  st.count = 1000;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    st.mean.push_back(rng.normal());
    st.var.push_back(k % 11 == 0 ? 0.0 : 0.05 + 2.0 * rng.uniform());
  }
  const auto sched = cosine_schedule(1000);
  const auto r = terminal_law_check(st, sched, 100000, kSeed);
  return {r.pass, fmt("abar_T=%.3g, 256 components x 3 starts, 1e5 draws, worst excess |z| %.3f "
                      "(Bonferroni limit %.3f)",
                      sched.alpha_bar(sched.steps()), r.discrepancy, r.tolerance)};
}

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

Outcome transform_fidelity() {
  Rng rng = Rng::derive(kSeed, "acceptance/transform");
  const Shape big{1, 32, 32};
  double round_trip = 0.0, parseval = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const PixelField x(big, random_values(big.size(), rng));
    const SpectralField s = to_spectral(x);
    const PixelField back = to_pixel(s);
    double energy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      round_trip = std::max(round_trip, std::abs(back[i] - x[i]));
      energy += x[i] * x[i];
    }
    parseval = std::max(parseval, std::abs(energy - big.plane() * packed_energy(s)) / energy);
  }
  double dft_gap = 0.0, bijection_gap = 0.0;
  for (auto [h, w] : {std::pair{4, 4}, std::pair{6, 8}}) {
    const Shape s{1, h, w};
    const oracle::Grid g{h, w};
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_values(s.size(), rng);
      const auto packed = oracle::pack(oracle::forward(x, g), g);
      const SpectralField ours = to_spectral(PixelField(s, x));
      for (std::size_t i = 0; i < packed.size(); ++i) {
        dft_gap = std::max(dft_gap, std::abs(ours[i] - packed[i]));
      }
      // Packing is a bijection: any real array unpacks to a Hermitian spectrum that packs back.
      const auto arbitrary = random_values(s.size(), rng);
      const auto repacked = oracle::pack(oracle::unpack(arbitrary, g), g);
      const auto ours_repacked = to_spectral(to_pixel(SpectralField(s, arbitrary)));
      for (std::size_t i = 0; i < arbitrary.size(); ++i) {
        bijection_gap = std::max({bijection_gap, std::abs(repacked[i] - arbitrary[i]),
                                  std::abs(ours_repacked[i] - arbitrary[i])});
      }
    }
  }
  const bool ok = round_trip < 1e-9 && dft_gap < 1e-10 && bijection_gap < 1e-10 && parseval < 1e-9;
  return {ok, fmt("round trip %.3g (tol 1e-9); direct DFT gap %.3g, bijection gap %.3g (tol 1e-10); "
                  "Parseval rel %.3g (tol 1e-9)",
                  round_trip, dft_gap, bijection_gap, parseval)};
}

Outcome ddpm_reduction() {
  const auto r = ddpm_reduction_check(cosine_schedule(1000), Shape{1, 8, 8}, kSeed, 1e-12);
  return {r.pass, fmt("forward and backward paths, max abs difference %.3g (tol 1e-12)",
                      r.discrepancy)};
}

Outcome invariance(const std::string& data_dir) {
  const auto& m = mnist(data_dir);
  std::ostringstream counts;
  bool ok = true;
  for (int d = 0; d <= 9; ++d) {
    const auto rep = count_invariant(stats_of(m.digit(d), std::to_string(d)), 1e-3);
    ok = ok && rep.near_zero > 0;
    counts << (d ? "," : "") << rep.near_zero;
  }
  return {ok, "near-zero components per digit (of 1024): " + counts.str()};
}

SpectralField power_law_field(const Shape& shape, double gamma, Rng& rng) {
  SpectralField s(shape);
  for (int r = 0; r < shape.height; ++r) {
    for (int c = 0; c < shape.width; ++c) {
      const double k = std::hypot(signed_frequency(r, shape.height), signed_frequency(c, shape.width));
      if (k == 0.0) continue;
      // A paired slot holds one of the two real parts that make up |X|^2.
      const double share = packing_weight(r, c, shape) == 1.0 ? 1.0 : 0.5;
      s.at(0, r, c) = std::sqrt(share * std::pow(k, -gamma)) * rng.normal();
    }
  }
  return s;
}

Outcome power_law(const std::string& data_dir) {
  Rng rng = Rng::derive(kSeed, "acceptance/power-law");
  const Shape shape{1, 64, 64};
  std::ostringstream fits;
  bool ok = true;
  for (double gamma : {1.5, 2.0, 3.5}) {
    std::vector<double> mean_power(shape.size(), 0.0);
    const int reps = 32;
    for (int i = 0; i < reps; ++i) {
      const SpectralField field = to_spectral(to_pixel(power_law_field(shape, gamma, rng)));
      const auto p = power_spectrum(field);
      for (std::size_t k = 0; k < p.size(); ++k) mean_power[k] += p[k] / reps;
    }
    const auto fit = power_law_fit(radial_profile_of_power(mean_power, shape, 32), 1.0, 32.0);
    ok = ok && std::abs(fit.exponent - gamma) <= 0.1;
    fits << fmt("%s%.1f->%.3f", gamma == 1.5 ? "" : ", ", gamma, fit.exponent);
  }

  const auto& m = mnist(data_dir);
  const Shape ms = m.data.shape;
  std::vector<double> mean_power(ms.size(), 0.0);
  for (const auto& img : m.data.images) {
    const auto p = power_spectrum(to_spectral(img));
    for (std::size_t k = 0; k < p.size(); ++k) mean_power[k] += p[k];
  }
  const auto profile = radial_profile_of_power(mean_power, ms, 16);
  const auto smooth = smooth_profile(profile, 3);
  bool monotone = true;
  for (std::size_t b = 1; b < smooth.size() / 2; ++b) monotone = monotone && smooth[b] <= smooth[b - 1];
  return {ok && monotone, "synthetic gamma " + fits.str() + " (tol 0.1); MNIST smoothed profile " +
                              (monotone ? "nonincreasing" : "NOT nonincreasing") +
                              " over first " + std::to_string(smooth.size() / 2) + " bins"};
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i];
  return s / static_cast<double>(to - from);
}

Outcome training_smoke(const std::string& data_dir) {
  const auto zeros = mnist(data_dir).digit(0);
  const auto start = std::chrono::steady_clock::now();
  TrainConfig cfg;
  cfg.seed = kSeed;
  const auto set = TrainingSet::build(zeros, {}, StatsScope::Global);
  const auto sched = cosine_schedule(1000);
  ConvDenoiserConfig dc;
  dc.shape = zeros.front().shape();
  auto net = ConvDenoiser::initialised(dc, kSeed);
  const auto result = train_loop(cfg, set, sched, net);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& h = result.history;
  const double first = mean_of(h, 0, 100);
  const double last = mean_of(h, h.size() - 100, h.size());
  const auto grad = gradient_check(net, set.samples.front(), set.stats.front(), 500, sched, kSeed);
  const bool ok = last <= 0.5 * first && grad.max_relative_error < 1e-4 && seconds < 600.0;
  return {ok, fmt("%zu digit-0 images, %d iterations in %.1f s; loss first-100 mean %.5f, "
                  "last-100 mean %.5f, ratio %.3f (need <= 0.5); gradient check %.3g (tol 1e-4)",
                  zeros.size(), cfg.iterations, seconds, first, last, last / first,
                  grad.max_relative_error)};
}

ConvDenoiser train_small(const TrainingSet& set, const NoiseSchedule& sched, Objective objective,
                         int iterations, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.iterations = iterations;
  cfg.objective = objective;
  ConvDenoiserConfig dc;
  dc.shape = set.samples.front().shape();
  auto net = ConvDenoiser::initialised(dc, seed);
  train_loop(cfg, set, sched, net);
  return net;
}

std::vector<PixelField> images_of(std::vector<SampleResult> results) {
  std::vector<PixelField> out;
  for (auto& r : results) out.push_back(std::move(r.image));
  return out;
}

Outcome comparative_sampling(const std::string& data_dir) {
  const auto& m = mnist(data_dir);
  const auto sched = cosine_schedule(200);
  const int budget = 300;
  const int n = 64;

  const auto zeros = m.digit(0);
  const auto set0 = TrainingSet::build(zeros, {}, StatsScope::Global);
  const ClassStats& stats0 = set0.stats.front();
  const auto ins = train_small(set0, sched, Objective::Inspect, budget, kSeed);
  const auto ddpm = train_small(set0, sched, Objective::Ddpm, budget, kSeed);
  const double d_ins =
      spectral_moment_distance(images_of(sample_batch(ins, stats0, sched, kSeed, n, 1)), stats0);
  std::vector<PixelField> ddpm_images;
  for (auto& r : ddpm_sample_batch(ddpm, stats0.shape, sched, kSeed, n, 1)) {
    ddpm_images.push_back(std::move(r.image));
  }
  const double d_ddpm = spectral_moment_distance(ddpm_images, stats0);

  // One unconditional model; conditioning only swaps in the class statistics at sampling time.
  const auto all = TrainingSet::build(m.data.images, {}, StatsScope::Global);
  const auto cond = train_small(all, sched, Objective::Inspect, TrainConfig{}.iterations, kSeed);
  std::vector<ClassStats> per_class;
  for (int d = 0; d <= 9; ++d) per_class.push_back(stats_of(m.digit(d), std::to_string(d)));
  int matched = 0;
  std::ostringstream picks;
  for (int d = 0; d <= 9; ++d) {
    const auto& own = per_class[static_cast<std::size_t>(d)];
    const auto imgs = images_of(sample_batch(cond, own, sched, kSeed + 1 + d, n, 1));
    int best = -1;
    double best_d = 0.0;
    for (int c = 0; c <= 9; ++c) {
      const double dist = spectral_moment_distance(imgs, per_class[static_cast<std::size_t>(c)]);
      if (best < 0 || dist < best_d) {
        best = c;
        best_d = dist;
      }
    }
    matched += best == d;
    picks << (d ? "," : "") << best;
  }
  return {d_ins < d_ddpm && matched >= 8,
          fmt("digit-0, %d iterations, T=%d, %d samples: InSPECT %.4f vs DDPM %.4f; ", budget,
              sched.steps(), n, d_ins, d_ddpm) +
              "conditional nearest class per label " + picks.str() + " (" +
              std::to_string(matched) + "/10 matched, need 8)"};
}

Outcome drift_analysis() {
  const auto cosine = cosine_schedule(1000);
  const auto identity = drift_identity_check(cosine, 1e-12);
  const NoiseSchedule flat(std::vector<double>(10000, 0.99));
  const auto geo = drift_convergence_check(DriftSequence::geometric(10000, 0.1, 0.9), flat, 10000);
  double sup = 0, ratio = 0;
  for (const auto& [k, v] : geo.params) {
    if (k == "sup") sup = v;
    if (k == "fitted_increment_ratio") ratio = v;
  }
  return {identity.pass && geo.pass && geo.note == "condition satisfied",
          fmt("identity error %.3g (tol 1e-12); geometric p=0.9 over 1e4 steps: sup %.4f, "
              "fitted increment ratio %.5f",
              identity.discrepancy, sup, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string data_dir = INSPECT_DATA_DIR;
  std::vector<int> only;
  app.add_option("--data-dir", data_dir, "Directory with the MNIST IDX files");
  app.add_option("--only", only, "Run only these criteria (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"forward composition", forward_composition},
      {"posterior correctness", posterior_correctness},
      {"coefficient identities", coefficient_identities},
      {"terminal law", terminal_law},
      {"transform fidelity", transform_fidelity},
      {"DDPM reduction", ddpm_reduction},
      {"invariance analysis", [&] { return invariance(data_dir); }},
      {"power law", [&] { return power_law(data_dir); }},
      {"training smoke", [&] { return training_smoke(data_dir); }},
      {"comparative sampling", [&] { return comparative_sampling(data_dir); }},
      {"drift analysis", drift_analysis},
  };
  const std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << "AC" << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << criteria[i].first
              << ": " << o.detail << fmt(" [%.1f s]", s) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
