#include "whamkit/app/commands.h"
#include "whamkit/app/config.h"
#include "whamkit/app/evaluate.h"
#include "whamkit/app/train.h"
#include "whamkit/nn/checkpoint.h"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using namespace whamkit;
using namespace whamkit::app;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("whamkit_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& s) const { return path / s; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

SynthRun small_synth(const fs::path& out, int count = 10) {
  SynthRun run;
  run.out = out;
  run.count = count;
  run.seed = 4;
  run.set("sequence_length", "24");
  run.set("feature_dim", "6");
  return run;
}

RunConfig small_run(const fs::path& dataset, const fs::path& out, int epochs) {
  RunConfig c;
  c.dataset = dataset;
  c.out = out;
  c.epochs = epochs;
  c.seed = 3;
  c.batch = 3;
  c.chunk = 12;
  c.lr = 1e-3;
  c.dims.hidden = 8;
  c.dims.feature = 6;
  c.dims.integrator_hidden = 6;
  c.dims.init_hidden = 6;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WHAMKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config parsing") {
  RunConfig c;
  c.set("lr", "0.01");
  c.set_assignment("batch = 16");
  c.set("lambda_fs", "0.3");
  c.set("augment", "no");
  CHECK(c.lr == 0.01);
  CHECK(c.batch == 16);
  CHECK(c.weights[losses::kFootSlide] == 0.3);
  CHECK_FALSE(c.augment);
  CHECK(c.resolved_epochs() == 80);
  c.stage = Stage::kFinetune;
  CHECK(c.resolved_epochs() == 30);

  CHECK_THROWS_AS(c.set("bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("lambda_bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("batch", "x"), ConfigError);
  CHECK_THROWS_AS(c.set("augment", "maybe"), ConfigError);
  CHECK_THROWS_AS(c.set_assignment("no equals sign"), ConfigError);

  RunConfig bad;
  bad.batch = 0;
  CHECK_THROWS_AS(bad.validate_values(), ConfigError);
  bad = RunConfig{};
  bad.lr = -1;
  CHECK_THROWS_AS(bad.validate_values(), ConfigError);

  TempDir dir("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# comment\nseed = 9\nhidden = 16\n\nlr = 0.002\n";
  }
  RunConfig fromfile;
  fromfile.load_file(dir / "run.cfg");
  CHECK(fromfile.seed == 9);
  CHECK(fromfile.dims.hidden == 16);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "seed = 9\nhidden = many\n";
  }
  try {
    fromfile.load_file(dir / "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(fromfile.load_file(dir / "missing.cfg"), IoError);

  // to_text round-trips through load_file.
  {
    std::ofstream f(dir / "round.cfg");
    f << c.to_text();
  }
  RunConfig again;
  again.load_file(dir / "round.cfg");
  CHECK(again.to_text() == c.to_text());
}

TEST_CASE("synth run settings") {
  SynthRun r;
  r.set("camera.pitch_mean", "7.5");
  r.set("gait_mix", "1,0,0,0");
  r.set_assignment("count=3");
  CHECK(r.count == 3);
  CHECK(r.config.gait_mix[0] == 1.0);
  CHECK_THROWS_AS(r.set("gait_mix", "1,2"), InvalidInput);
  CHECK_THROWS_AS(r.set("nope", "1"), InvalidInput);
}

TEST_CASE("synth is deterministic and self-validating") {
  TempDir dir("synth");
  const auto a = run_synth(small_synth(dir / "a"));
  const auto b = run_synth(small_synth(dir / "b"));
  CHECK(a.count == 10);
  for (const char* f : {"manifest.json", "seq_0.ndjson", "seq_3.cam.ndjson", "seq_7.kp2d.ndjson", "seq_9.feat.bin"}) {
    CHECK(slurp(dir / ("a/" + std::string(f))) == slurp(dir / ("b/" + std::string(f))));
  }
  validate_dataset(dir / "a");

  SynthRun empty = small_synth(dir / "empty", 0);
  const auto m = run_synth(empty);
  CHECK(m.count == 0);
  CHECK(m.train.empty());

  // A missing sequence file fails validation.
  fs::remove(dir / "a/seq_3.feat.bin");
  CHECK_THROWS(validate_dataset(dir / "a"));
}

TEST_CASE("training: zero epochs, determinism, resume") {
  TempDir dir("train");
  run_synth(small_synth(dir / "ds", 12));

  const TrainResult zero = train(small_run(dir / "ds", dir / "zero", 0), false);
  const model::WhamParams fresh = model::WhamParams::create(small_run(dir / "ds", dir / "zero", 0).dims, 3);
  CHECK(zero.checkpoint.params == fresh.store.values());
  CHECK(zero.log.empty());

  const TrainResult a = train(small_run(dir / "ds", dir / "a", 2), false);
  const TrainResult b = train(small_run(dir / "ds", dir / "b", 2), false);
  CHECK(a.log.size() == 2);
  CHECK(a.checkpoint.params == b.checkpoint.params);
  CHECK(slurp(dir / "a" / kTrainLogFile) == slurp(dir / "b" / kTrainLogFile));
  CHECK(slurp(dir / "a" / kCheckpointFile) == slurp(dir / "b" / kCheckpointFile));
  CHECK(a.checkpoint.params != fresh.store.values());
  CHECK(a.log[1].train.total < a.log[0].train.total * 1.5);

  train(small_run(dir / "ds", dir / "c", 1), false);
  const TrainResult resumed = train(small_run(dir / "ds", dir / "c", 2), true);
  CHECK(resumed.checkpoint.epoch == 2);
  CHECK(resumed.checkpoint.params == a.checkpoint.params);

  RunConfig ft = small_run(dir / "ds", dir / "ft", 1);
  ft.stage = Stage::kFinetune;
  ft.init = dir / "missing" / kCheckpointFile;
  CHECK_THROWS_AS(train(ft, false), MissingCheckpoint);
  ft.init = dir / "a" / kCheckpointFile;
  const TrainResult tuned = train(ft, false);
  CHECK(tuned.checkpoint.stage == kStageFinetune);

  RunConfig wrong = small_run(dir / "ds", dir / "w", 1);
  wrong.dims.feature = 7;
  CHECK_THROWS_AS(train(wrong, false), ConfigError);
}

TEST_CASE("oracle evaluation scores zero and writes a consistent csv") {
  TempDir dir("eval");
  run_synth(small_synth(dir / "ds", 14));
  EvalOptions opt;
  opt.oracle = true;
  const EvalResult r = run_eval(std::nullopt, dir / "ds", dir / "out", opt);
  REQUIRE_FALSE(r.sequences.empty());
  for (const auto& s : r.sequences) {
    CHECK(s.report.mpjpe < 1e-9);
    CHECK(s.report.pa_mpjpe < 1e-6);
    CHECK(s.report.w_mpjpe_100 < 1e-6);
    CHECK(s.report.wa_mpjpe_100 < 1e-6);
    CHECK(s.report.accel_err < 1e-6);
    CHECK((std::isnan(s.report.rte) || s.report.rte < 1e-6));
    CHECK(fs::exists(dir / ("out/traj_" + std::to_string(s.index) + ".svg")));
  }
  const std::string csv = slurp(dir / "out/metrics.csv");
  CHECK(csv == metrics_csv(r));
  CHECK(csv.rfind("sequence,gait,mpjpe,pa_mpjpe,accel_err,w_mpjpe_100,wa_mpjpe_100,rte,jitter,fs,mpjpe_first10\n", 0) == 0);
  CHECK(csv.find("\naggregate,all,") != std::string::npos);

  CHECK_THROWS_AS(run_eval(dir / "nope.bin", dir / "ds", dir / "out2", EvalOptions{}), MissingCheckpoint);
}

TEST_CASE("trajectory svg") {
  std::vector<Vec3> truth, pred;
  for (int i = 0; i < 10; ++i) {
    truth.emplace_back(0.1 * i, 0.0, 0.2 * i);
    pred.emplace_back(0.1 * i + 0.05, 0.0, 0.2 * i);
  }
  const std::string svg = trajectory_svg(pred, truth, "seq 4");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("seq 4") != std::string::npos);
  CHECK(svg.find("x (m)") != std::string::npos);
  CHECK(svg.find("z (m)") != std::string::npos);
  CHECK(svg.find("#d62728") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  TempDir dir("cli");
  const std::string d = dir.path.string();
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("synth --out " + d + "/ds --count 8 --seed 1 --set sequence_length=20 --set feature_dim=4") == 0);
  CHECK(run_cli("synth --out " + d + "/bad --set sequence_length=abc") == 1);
  CHECK(run_cli("pretrain --dataset " + d + "/nowhere --out " + d + "/run --epochs 1") == 3);
  CHECK(run_cli("eval --checkpoint " + d + "/none.bin --dataset " + d + "/ds --out " + d + "/ev") == 5);
  CHECK(run_cli("eval --oracle --dataset " + d + "/ds --out " + d + "/ev --no-plots") == 0);
  CHECK(fs::exists(dir / "ev/metrics.csv"));
  CHECK(run_cli("pretrain --dataset " + d + "/ds --out " + d + "/run --epochs 1 --set hidden=8 --set feature_dim=5") ==
        1);
}
