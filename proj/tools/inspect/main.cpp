#include <iostream>

#include "commands.hpp"
#include "inspect/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral feature-preserving diffusion toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::Globals globals;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Global random seed");
  auto* threads_opt =
      app.add_option("--threads", globals.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", globals.quiet, "Suppress progress messages");

  cli::AnalyzeOptions analyze;
  cli::TrainOptions train;
  cli::SampleOptions sample;
  cli::VerifyOptions verify;
  cli::add_analyze(app, analyze);
  cli::add_train(app, train);
  cli::add_sample(app, sample);
  cli::add_verify(app, verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }
  if (seed_opt->count() > 0) globals.seed = seed;
  globals.threads_given = threads_opt->count() > 0;

  try {
    if (app.got_subcommand("analyze")) return cli::run_analyze(globals, analyze);
    if (app.got_subcommand("train")) return cli::run_train(globals, train);
    if (app.got_subcommand("sample")) return cli::run_sample(globals, sample);
    if (app.got_subcommand("verify")) return cli::run_verify(globals, verify);
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const inspect::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return cli::kIo;
  } catch (const inspect::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return cli::kIo;
  } catch (const inspect::DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const inspect::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return cli::kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kCheckFailed;
  }
  return cli::kUsage;
}
