// whamkit command-line front end. Exit codes:
//   0 ok, 1 bad configuration or input, 2 usage, 3 file I/O or format,
//   4 numeric failure, 5 missing checkpoint, 6 self-check failed, 7 other.

#include "whamkit/app/bench.h"
#include "whamkit/app/commands.h"
#include "whamkit/app/config.h"
#include "whamkit/app/evaluate.h"
#include "whamkit/app/gradsuite.h"
#include "whamkit/app/train.h"
#include "whamkit/nn/checkpoint.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace whamkit;
namespace fs = std::filesystem;

namespace {

int exit_code(const std::exception& e) {
  if (dynamic_cast<const app::MissingCheckpoint*>(&e)) return 5;
  if (dynamic_cast<const app::ValidationError*>(&e)) return 6;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const BehindCamera*>(&e) ||
      dynamic_cast<const UndefinedMetric*>(&e)) {
    return 4;
  }
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const IndexError*>(&e)) return 1;
  return 7;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string dataset, out, init;
  int epochs = -2;
  long long seed = -1;
  bool resume = false;
  bool no_integrator = false;
};

void add_train_options(CLI::App* cmd, TrainArgs& a, bool finetune) {
  cmd->add_option("--config", a.config, "key = value config file");
  cmd->add_option("--set", a.sets, "override, key=value (repeatable)");
  cmd->add_option("--dataset", a.dataset, "dataset directory");
  cmd->add_option("--out", a.out, "run directory");
  cmd->add_option("--epochs", a.epochs, "epoch count");
  cmd->add_option("--seed", a.seed, "training seed");
  cmd->add_flag("--resume", a.resume, "continue from <out>/checkpoint.bin");
  if (finetune) {
    cmd->add_option("--init", a.init, "pretrain checkpoint");
    cmd->add_flag("--no-integrator", a.no_integrator, "finetune without the feature integrator");
  }
}

app::RunConfig build_config(const TrainArgs& a, app::Stage stage) {
  app::RunConfig c;
  c.stage = stage;
  if (!a.config.empty()) c.load_file(a.config);
  for (const auto& s : a.sets) c.set_assignment(s);
  c.stage = stage;
  if (!a.dataset.empty()) c.dataset = a.dataset;
  if (!a.out.empty()) c.out = a.out;
  if (!a.init.empty()) c.init = a.init;
  if (a.epochs != -2) c.epochs = a.epochs;
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  if (a.no_integrator) c.integrator = false;
  c.validate_values();
  return c;
}

struct EvalArgs {
  std::string checkpoint, dataset, out;
  app::EvalOptions opt;
  bool no_plots = false;
};

void add_eval_options(CLI::App* cmd, EvalArgs& a, bool oracle) {
  cmd->add_option("--checkpoint", a.checkpoint, "model checkpoint");
  cmd->add_option("--dataset", a.dataset, "dataset directory")->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--split", a.opt.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  cmd->add_flag("--no-integrator", a.opt.no_integrator, "skip the feature integrator");
  cmd->add_flag("--no-omega", a.opt.no_omega, "zero the camera angular velocity input");
  cmd->add_flag("--no-refiner", a.opt.no_refiner, "skip velocity adjustment and the trajectory refiner");
  cmd->add_flag("--no-neural-init", a.opt.no_neural_init, "start the recurrent units from zero");
  if (oracle) {
    cmd->add_flag("--oracle", a.opt.oracle, "score the ground truth against itself");
    cmd->add_flag("--no-plots", a.no_plots, "skip the trajectory SVGs");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"whamkit: world-grounded motion recovery on synthetic data"};
  cli.require_subcommand(1);

  auto* synth_cmd = cli.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_config;
  std::vector<std::string> synth_sets;
  std::string synth_out;
  int synth_count = -1;
  long long synth_seed = -1;
  synth_cmd->add_option("--config", synth_config, "key = value config file");
  synth_cmd->add_option("--set", synth_sets, "override, key=value (repeatable)");
  synth_cmd->add_option("--out", synth_out, "dataset directory");
  synth_cmd->add_option("--count", synth_count, "number of sequences");
  synth_cmd->add_option("--seed", synth_seed, "dataset seed");

  TrainArgs pre_args, fine_args;
  auto* pretrain_cmd = cli.add_subcommand("pretrain", "train without the feature integrator");
  add_train_options(pretrain_cmd, pre_args, false);
  auto* finetune_cmd = cli.add_subcommand("finetune", "train with the feature integrator from a pretrain checkpoint");
  add_train_options(finetune_cmd, fine_args, true);

  EvalArgs infer_args, eval_args;
  auto* infer_cmd = cli.add_subcommand("infer", "write model outputs for a split");
  add_eval_options(infer_cmd, infer_args, false);
  auto* eval_cmd = cli.add_subcommand("eval", "metrics.csv and trajectory plots for a split");
  add_eval_options(eval_cmd, eval_args, true);

  auto* grad_cmd = cli.add_subcommand("gradcheck", "finite-difference gradient suite at toy dims");
  nn::GradCheckOptions grad_opt;
  grad_cmd->add_option("--delta", grad_opt.delta, "central difference step");
  grad_cmd->add_option("--tol", grad_opt.tolerance, "relative error tolerance");

  auto* bench_cmd = cli.add_subcommand("bench", "inference throughput, batch 1 and batch 64");
  std::string bench_ckpt;
  int bench_runs = 5, bench_frames = 81;
  bench_cmd->add_option("--checkpoint", bench_ckpt, "model checkpoint")->required();
  bench_cmd->add_option("--runs", bench_runs, "timed runs per mode");
  bench_cmd->add_option("--frames", bench_frames, "frames per sequence");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) {
      app::SynthRun run;
      if (!synth_config.empty()) run.load_file(synth_config);
      for (const auto& s : synth_sets) run.set_assignment(s);
      if (!synth_out.empty()) run.out = synth_out;
      if (synth_count >= 0) run.count = synth_count;
      if (synth_seed >= 0) run.seed = static_cast<std::uint64_t>(synth_seed);
      const auto m = app::run_synth(run);
      std::printf("wrote %d sequences to %s (train %zu, val %zu, test %zu)\n", m.count, run.out.string().c_str(),
                  m.train.size(), m.val.size(), m.test.size());
    } else if (*pretrain_cmd || *finetune_cmd) {
      const bool fine = static_cast<bool>(*finetune_cmd);
      const app::RunConfig cfg = build_config(fine ? fine_args : pre_args, fine ? app::Stage::kFinetune : app::Stage::kPretrain);
      const app::TrainResult r = app::train(cfg, (fine ? fine_args : pre_args).resume);
      for (const auto& e : r.log) {
        std::printf("epoch %d loss %.6f val %.6f\n", e.epoch, e.train.total, e.val_total);
      }
      std::printf("checkpoint %s (stage %s, epoch %u)\n", (cfg.out / app::kCheckpointFile).string().c_str(),
                  r.checkpoint.stage.c_str(), r.checkpoint.epoch);
    } else if (*infer_cmd) {
      const int n = app::run_infer(infer_args.checkpoint, infer_args.dataset, infer_args.out, infer_args.opt);
      std::printf("wrote %d outputs to %s\n", n, infer_args.out.c_str());
    } else if (*eval_cmd) {
      eval_args.opt.plots = !eval_args.no_plots;
      std::optional<fs::path> ckpt;
      if (!eval_args.checkpoint.empty()) ckpt = eval_args.checkpoint;
      const auto r = app::run_eval(ckpt, eval_args.dataset, eval_args.out, eval_args.opt);
      const auto cols = metrics::MetricReport::columns();
      const auto vals = r.aggregate.values();
      for (std::size_t i = 0; i < cols.size(); ++i) std::printf("%-14s %.6f\n", cols[i].c_str(), vals[i]);
    } else if (*grad_cmd) {
      const auto cases = app::run_gradient_suite(grad_opt);
      std::fputs(app::to_text(cases).c_str(), stdout);
      for (const auto& c : cases) {
        if (!c.report.passed) return 6;
      }
    } else if (*bench_cmd) {
      if (!fs::exists(bench_ckpt)) throw app::MissingCheckpoint("bench needs a checkpoint: " + bench_ckpt);
      const nn::Checkpoint c = nn::load_checkpoint(bench_ckpt);
      const auto params = app::params_from_checkpoint(c);
      const auto opt = app::forward_options(c.stage, app::EvalOptions{});
      std::fputs(app::to_text(app::run_bench(params, opt, bench_runs, bench_frames)).c_str(), stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "whamkit: %s\n", e.what());
    return exit_code(e);
  }
  return 0;
}
