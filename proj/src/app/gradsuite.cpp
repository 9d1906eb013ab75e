#include "whamkit/app/gradsuite.h"

#include "whamkit/core/random.h"
#include "whamkit/losses/losses.h"
#include "whamkit/model/batch.h"
#include "whamkit/model/network.h"
#include "whamkit/nn/layers.h"
#include "whamkit/synth/dataset.h"

#include <chrono>
#include <cstdio>

namespace whamkit::app {

namespace {

using nn::LossFn;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor2;
using nn::Var;

Tensor2 random_tensor(Rng& rng, int rows, int cols) {
  Tensor2 t(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t(r, c) = normal(rng, 0.0, 1.0);
  return t;
}

template <class Build>
LossFn store_loss(const ParamStore& base, Build build) {
  return [&base, build](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    ParamStore local = base;
    local.values() = p;
    Tape tape(&local);
    const Var l = build(tape, local);
    if (grad) {
      tape.backward(l);
      *grad = tape.param_grad();
    }
    return l.value()(0, 0);
  };
}

void push(std::vector<GradCase>& out, const std::string& name, const ParamStore& store, const LossFn& loss,
          const nn::GradCheckOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCase c;
  c.name = name;
  c.report = nn::grad_check(store, loss, o);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.push_back(std::move(c));
}

// Last layers of the integrator, refiner head and init net start at zero,
// which would hide half of the chain rule; give them small weights.
void wake(model::WhamParams& p, std::uint64_t seed) {
  Rng rng(seed);
  for (const nn::LinearLayer* l : {&p.integrator.layers.back(), &p.refiner_head, &p.init_net.layers.back()}) {
    for (int id : {l->weight, l->bias}) {
      auto v = p.store.view(id);
      for (Eigen::Index r = 0; r < v.rows(); ++r)
        for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = normal(rng, 0.0, 0.1);
    }
  }
}

}  // namespace

std::vector<GradCase> run_gradient_suite(const nn::GradCheckOptions& options, std::uint64_t seed) {
  std::vector<GradCase> out;
  Rng rng(seed);

  {
    ParamStore s;
    const auto lin = nn::LinearLayer::create(s, "linear", "suite", 5, 3);
    lin.init(s, seed + 1);
    const Tensor2 x = random_tensor(rng, 4, 5), y = random_tensor(rng, 4, 3);
    push(out, "layer.linear", s, store_loss(s, [=](Tape& tape, const ParamStore&) {
           return nn::sum_sq(nn::sub(nn::apply(nn::bind(tape, lin), tape.constant(x)), tape.constant(y)));
         }), options);
  }
  {
    ParamStore s;
    const auto stack = nn::DenseStack::create(s, "dense", "suite", {5, 6, 3});
    stack.init(s, seed + 2);
    const Tensor2 x = random_tensor(rng, 4, 5), y = random_tensor(rng, 4, 3);
    push(out, "layer.dense_stack", s, store_loss(s, [=](Tape& tape, const ParamStore&) {
           return nn::sum_sq(nn::sub(nn::apply(nn::bind(tape, stack), tape.constant(x)), tape.constant(y)));
         }), options);
  }
  {
    ParamStore s;
    const auto gru = nn::GruLayer::create(s, "gru", "suite", 3, 8);
    gru.init(s, seed + 3);
    const int frames = 4, batch = 2;
    const Tensor2 xs = random_tensor(rng, frames * batch, 3), y = random_tensor(rng, batch, 8);
    push(out, "layer.gru", s, store_loss(s, [=](Tape& tape, const ParamStore&) {
           const auto g = nn::bind(tape, gru);
           Var h = tape.constant(Tensor2::Zero(batch, 8));
           Var acc = tape.constant(Tensor2::Zero(1, 1));
           for (int t = 0; t < frames; ++t) {
             h = nn::gru_step(g, tape.constant(xs.middleRows(t * batch, batch)), h);
             acc = acc + nn::sum_sq(nn::sub(h, tape.constant(y)));
           }
           return acc;
         }), options);
  }

  // Composed model.
  synth::SynthConfig cfg;
  cfg.sequence_length = 4;
  cfg.feature_dim = 4;
  const synth::FeatureEncoder enc(cfg.feature_dim, seed + 4);
  std::vector<model::SequenceData> seqs;
  for (int i = 0; i < 2; ++i) seqs.push_back(model::canonicalize(synth::generate_sample(cfg, seed + 5, i, enc)));
  std::vector<const model::SequenceData*> ptrs{&seqs[0], &seqs[1]};
  const model::Batch batch = model::make_batch(ptrs, 0.02, seed + 6);
  model::ModelDims dims;
  dims.hidden = 8;
  dims.feature = 4;
  dims.integrator_hidden = 6;
  dims.init_hidden = 6;
  model::WhamParams p = model::WhamParams::create(dims, seed + 7);
  wake(p, seed + 8);

  auto model_loss = [&](const losses::LossWeights& w, model::InitMode mode) {
    return [&p, &batch, w, mode](const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
      model::WhamParams q = p;
      q.store.values() = params;
      Tape tape(&q.store);
      model::ForwardOptions opt;
      opt.integrator = true;
      opt.init = mode;
      const auto r = model::forward(tape, model::bind(tape, q), batch, opt);
      const auto g = losses::total_loss(r, batch, w);
      if (grad) {
        tape.backward(g.total);
        *grad = tape.param_grad();
      }
      return g.total.value()(0, 0);
    };
  };
  for (int k = 0; k < losses::kNumTerms; ++k) {
    losses::LossWeights w;
    for (int j = 0; j < losses::kNumTerms; ++j) w[j] = j == k ? 1.0 : 0.0;
    push(out, "model.term." + std::string(losses::term_name(k)), p.store, model_loss(w, model::InitMode::kTruth),
         options);
  }
  push(out, "model.total.truth_init", p.store, model_loss(losses::LossWeights{}, model::InitMode::kTruth), options);
  push(out, "model.total.predicted_init", p.store, model_loss(losses::LossWeights{}, model::InitMode::kPredicted),
       options);
  return out;
}

std::string to_text(const std::vector<GradCase>& cases) {
  std::string s;
  char buf[256];
  for (const auto& c : cases) {
    std::snprintf(buf, sizeof buf, "%-28s %s max_rel=%.3e (%.2fs)\n", c.name.c_str(), c.report.passed ? "ok  " : "FAIL",
                  c.report.max_rel_error, c.seconds);
    s += buf;
    if (!c.report.passed) {
      for (const auto& b : c.report.blocks) {
        std::snprintf(buf, sizeof buf, "    %-24s rel=%.3e analytic=%.6g numeric=%.6g\n", b.name.c_str(),
                      b.max_rel_error, b.analytic, b.numeric);
        s += buf;
      }
    }
  }
  return s;
}

}  // namespace whamkit::app
