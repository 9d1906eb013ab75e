#include "whamkit/app/bench.h"

#include "whamkit/core/error.h"
#include "whamkit/model/batch.h"
#include "whamkit/synth/dataset.h"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace whamkit::app {

namespace {

constexpr int kBigBatch = 64;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchReport run_bench(const model::WhamParams& params, const model::ForwardOptions& opt, int runs, int frames,
                      std::uint64_t seed) {
  if (runs < 1 || frames < 2) throw InvalidInput("bench: need runs >= 1 and frames >= 2");
  synth::SynthConfig cfg;
  cfg.sequence_length = frames;
  cfg.feature_dim = params.dims.feature;
  const synth::FeatureEncoder enc(cfg.feature_dim, seed);
  std::vector<model::SequenceData> seqs;
  for (int i = 0; i < kBigBatch; ++i) seqs.push_back(model::canonicalize(synth::generate_sample(cfg, seed, i, enc)));
  std::vector<const model::SequenceData*> all;
  for (const auto& s : seqs) all.push_back(&s);
  std::vector<model::Batch> singles;
  for (const auto* s : all) singles.push_back(model::make_batch(std::span(&s, 1)));
  const model::Batch big = model::make_batch(all);

  auto run = [&](const model::Batch& b) {
    nn::Tape tape(&params.store);
    const auto r = model::forward(tape, model::bind(tape, params), b, opt);
    if (r.tau.empty()) throw NumericError("bench: empty roll-out");
  };

  BenchReport rep;
  rep.frames = frames;
  rep.hidden = params.dims.hidden;
  rep.batch1.batch = 1;
  rep.batch64.batch = kBigBatch;
  const double total = static_cast<double>(kBigBatch) * frames;
  run(singles[0]);  // warm-up
  for (int k = 0; k < runs; ++k) {
    rep.batch1.runs.push_back(total / seconds([&] {
      for (const auto& b : singles) run(b);
    }));
    rep.batch64.runs.push_back(total / seconds([&] { run(big); }));
  }
  rep.batch1.median = median(rep.batch1.runs);
  rep.batch64.median = median(rep.batch64.runs);
  return rep;
}

std::string to_text(const BenchReport& r) {
  std::string s;
  char buf[160];
  std::snprintf(buf, sizeof buf, "frames=%d hidden=%d threads=1\n", r.frames, r.hidden);
  s += buf;
  for (const BenchMode* m : {&r.batch1, &r.batch64}) {
    std::snprintf(buf, sizeof buf, "batch=%d median_fps=%.1f runs=", m->batch, m->median);
    s += buf;
    for (std::size_t i = 0; i < m->runs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.1f", i ? "," : "", m->runs[i]);
      s += buf;
    }
    s += "\n";
  }
  return s;
}

}  // namespace whamkit::app
