#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/nbp.hpp"
#include "qldpc/nn/checkpoint.hpp"
#include "qldpc/rng.hpp"
#include "qldpc/tanner.hpp"

using namespace qldpc;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

CssCode hgp_129() {
  auto [c1, c2] = bch_seed_codes();
  return build_hgp(c1, c2);
}

CssCode hgp_58() {
  auto [c1, c2] = bch_seed_codes();
  (void)c2;
  return build_hgp(c1, c1);
}

// 10 variables, 6 checks, all check degrees 3, no isolated variables.
BinMatrix toy_matrix() {
  return BinMatrix::from_rows({
      "1110000000",
      "0011100000",
      "0000111000",
      "0000001110",
      "1000000011",
      "0100010001",
  });
}

void randomize_model(NbpModel& model, Rng& rng, double lo, double hi) {
  for (auto& [name, entry] : model.store.entries()) {
    for (double& x : entry.value.v) x = lo + (hi - lo) * rng.next_double();
  }
}

double tape_loss_value(const TannerGraph& graph, const NbpModel& model,
                       const BinVector& s, double prior, const BinVector& e,
                       double llr_clamp) {
  nn::Tape tape;
  nn::TapeBinding bind(tape, const_cast<NbpModel&>(model).store);
  nn::Tape::Var loss =
      nbp_unrolled_loss(tape, bind, graph, model, s, prior, e, llr_clamp);
  return tape.value(loss).v[0];
}

}  // namespace

TEST_CASE("model construction starts every weight set at one") {
  TannerGraph graph = tanner_graph(toy_matrix());
  NbpModel m = make_nbp_model(graph, 3, false);
  CHECK(m.iterations == 3);
  CHECK(m.edge_count == graph.edge_count());
  CHECK(m.var_count == graph.var_count);
  for (std::string p : {"it01", "it02", "it03", "out"}) {
    REQUIRE(m.store.has(p + ".w"));
    REQUIRE(m.store.has(p + ".b"));
    const nn::Tensor& w = m.store.value(p + ".w");
    const nn::Tensor& b = m.store.value(p + ".b");
    CHECK(w.rows == graph.edge_count());
    CHECK(b.rows == graph.var_count);
    for (double x : w.v) CHECK(x == 1.0);
    for (double x : b.v) CHECK(x == 1.0);
  }
  CHECK(m.store.scalar_count() == 4 * (graph.edge_count() + graph.var_count));

  NbpModel tied = make_nbp_model(graph, 5, true);
  CHECK(tied.store.has("shared.w"));
  CHECK(!tied.store.has("it01.w"));
  CHECK(tied.store.scalar_count() == 2 * (graph.edge_count() + graph.var_count));
  CHECK(tied.iter_prefix(1) == "shared");
  CHECK(tied.iter_prefix(5) == "shared");

  CHECK_THROWS_AS(make_nbp_model(graph, 0, false), std::invalid_argument);
}

TEST_CASE("unit initialization reproduces plain BP message-for-message") {
  CssCode code = hgp_129();
  REQUIRE(code.n == 129);
  REQUIRE(code.k == 28);
  TannerGraph graph = tanner_graph(code);
  NbpModel model = make_nbp_model(graph, 12, false);
  const double prior = prior_llr({0.01});

  Rng rng(20240517);
  for (int sample = 0; sample < 25; ++sample) {
    ErrorVector e = sample_error(code, {0.05}, rng);
    Syndrome s = syndrome_of(code, e);

    BpTrace bp_trace, nbp_trace;
    BpConfig bp_cfg;
    bp_cfg.max_iter = 12;
    bp_cfg.early_stop = false;
    NbpConfig nbp_cfg;
    nbp_cfg.early_stop = false;
    BpResult ref = bp_decode(graph, s, prior, bp_cfg, &bp_trace);
    BpResult got = nbp_decode(graph, s, prior, model, nbp_cfg, &nbp_trace);

    REQUIRE(nbp_trace.v2c.size() == bp_trace.v2c.size());
    REQUIRE(nbp_trace.c2v.size() == bp_trace.c2v.size());
    REQUIRE(nbp_trace.posterior.size() == bp_trace.posterior.size());
    for (std::size_t i = 0; i < bp_trace.v2c.size(); ++i) {
      CHECK(max_abs_diff(nbp_trace.v2c[i], bp_trace.v2c[i]) == 0.0);
      CHECK(max_abs_diff(nbp_trace.c2v[i], bp_trace.c2v[i]) == 0.0);
    }
    for (std::size_t i = 0; i < bp_trace.posterior.size(); ++i)
      CHECK(max_abs_diff(nbp_trace.posterior[i], bp_trace.posterior[i]) == 0.0);
    CHECK(got.e_hat == ref.e_hat);
    CHECK(got.converged == ref.converged);
    CHECK(got.iterations_used == ref.iterations_used);

    // Early stopping must agree too (same iteration, same result).
    bp_cfg.early_stop = true;
    nbp_cfg.early_stop = true;
    BpResult ref_es = bp_decode(graph, s, prior, bp_cfg);
    BpResult got_es = nbp_decode(graph, s, prior, model, nbp_cfg);
    CHECK(got_es.e_hat == ref_es.e_hat);
    CHECK(got_es.converged == ref_es.converged);
    CHECK(got_es.iterations_used == ref_es.iterations_used);
    CHECK(max_abs_diff(got_es.posterior_llr, ref_es.posterior_llr) == 0.0);
  }
}

TEST_CASE("zero syndrome with positive weights decodes to the zero error") {
  CssCode code = hgp_58();
  TannerGraph graph = tanner_graph(code);
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    NbpModel model = make_nbp_model(graph, 12, false);
    randomize_model(model, rng, 0.5, 1.5);
    NbpConfig cfg;
    cfg.early_stop = false;
    BpResult r = nbp_decode(graph, BinVector(graph.check_count),
                            prior_llr({0.02}), model, cfg);
    CHECK(r.converged);
    CHECK(r.e_hat.weight() == 0);
    for (double x : r.posterior_llr) CHECK(x > 0.0);
  }
}

TEST_CASE("zeroing an iteration's weights reduces that sweep to the scaled prior") {
  CssCode code = hgp_58();
  TannerGraph graph = tanner_graph(code);
  const double prior = prior_llr({0.01});

  NbpModel model = make_nbp_model(graph, 4, false);
  nn::Tensor& w2 = model.store.value("it02.w");
  for (double& x : w2.v) x = 0.0;
  nn::Tensor& b2 = model.store.value("it02.b");
  for (double& x : b2.v) x = 1.25;

  Rng rng(5);
  ErrorVector e = sample_error(code, {0.03}, rng);
  Syndrome s = syndrome_of(code, e);
  REQUIRE(s.weight() > 0);

  BpTrace trace;
  NbpConfig cfg;
  cfg.early_stop = false;
  nbp_decode(graph, s, prior, model, cfg, &trace);

  // Iteration 2's variable messages ignore the incoming check messages.
  REQUIRE(trace.v2c.size() == 4);
  for (double m : trace.v2c[1]) CHECK(m == 1.25 * prior);

  // So iteration 2's check messages equal a check update fed only priors.
  for (std::size_t c = 0; c < graph.check_count; ++c) {
    std::vector<double> in(graph.check_edges[c].size(), 1.25 * prior);
    std::vector<double> expect = check_node_update(in, s.get(c), 20.0);
    for (std::size_t i = 0; i < graph.check_edges[c].size(); ++i)
      CHECK(trace.c2v[1][graph.check_edges[c][i]] == expect[i]);
  }

  // Iteration 1 never sees check messages, so zeroing its weights is a no-op.
  NbpModel m1 = make_nbp_model(graph, 4, false);
  nn::Tensor& w1 = m1.store.value("it01.w");
  for (double& x : w1.v) x = 0.0;
  BpTrace t1;
  nbp_decode(graph, s, prior, m1, cfg, &t1);
  BpTrace t_ref;
  nbp_decode(graph, s, prior, make_nbp_model(graph, 4, false), cfg, &t_ref);
  for (std::size_t i = 0; i < t_ref.v2c.size(); ++i) {
    CHECK(max_abs_diff(t1.v2c[i], t_ref.v2c[i]) == 0.0);
    CHECK(max_abs_diff(t1.c2v[i], t_ref.c2v[i]) == 0.0);
  }
}

TEST_CASE("tape-unrolled readout matches the fast decoder") {
  CssCode code = hgp_58();
  TannerGraph graph = tanner_graph(code);
  const double prior = prior_llr({0.02});
  Rng rng(31);

  for (int trial = 0; trial < 10; ++trial) {
    NbpModel model = make_nbp_model(graph, 4, false);
    randomize_model(model, rng, 0.7, 1.3);
    ErrorVector e = sample_error(code, {0.04}, rng);
    Syndrome s = syndrome_of(code, e);

    BpTrace trace;
    NbpConfig cfg;
    cfg.early_stop = false;
    nbp_decode(graph, s, prior, model, cfg, &trace);
    const std::vector<double>& mu = trace.posterior.back();

    // Same BCE the trainer minimizes, recomputed from the fast engine's
    // final posteriors.
    double acc = 0.0;
    for (std::size_t v = 0; v < graph.var_count; ++v) {
      double z = -mu[v];
      double p = 1.0 / (1.0 + std::exp(-z));
      double pc = std::clamp(p, 1e-7, 1.0 - 1e-7);
      double y = e.get(v) ? 1.0 : 0.0;
      acc += y * std::log(pc) + (-1.0 * y + 1.0) * std::log(-1.0 * pc + 1.0);
    }
    double expect = acc * (-1.0 / static_cast<double>(graph.var_count));

    double got = tape_loss_value(graph, model, s, prior, e, 20.0);
    CHECK(std::abs(got - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("analytic gradients match finite differences on a toy code") {
  BinMatrix h = toy_matrix();
  TannerGraph graph = tanner_graph(h);
  const double prior = 1.7;
  const double clamp = 20.0;
  const double step = 1e-5;

  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    Rng rng(derive_seed(777, inst));
    NbpModel model = make_nbp_model(graph, 3, false);
    randomize_model(model, rng, 0.75, 1.25);

    BinVector e(graph.var_count);
    for (std::size_t v = 0; v < graph.var_count; ++v)
      e.set(v, rng.next_bernoulli(0.3));
    BinVector s = mat_vec(h, e);

    // Analytic gradients from one reverse pass.
    model.store.zero_grads();
    {
      nn::Tape tape;
      nn::TapeBinding bind(tape, model.store);
      nn::Tape::Var loss =
          nbp_unrolled_loss(tape, bind, graph, model, s, prior, e, clamp);
      tape.backward(loss);
      bind.accumulate_grads();
    }

    double max_grad = 0.0;
    for (auto& [name, entry] : model.store.entries()) {
      REQUIRE(entry.has_grad);
      for (std::size_t i = 0; i < entry.value.v.size(); ++i) {
        double saved = entry.value.v[i];
        entry.value.v[i] = saved + step;
        double up = tape_loss_value(graph, model, s, prior, e, clamp);
        entry.value.v[i] = saved - step;
        double down = tape_loss_value(graph, model, s, prior, e, clamp);
        entry.value.v[i] = saved;
        double fd = (up - down) / (2.0 * step);
        double an = entry.grad.v[i];
        max_grad = std::max(max_grad, std::abs(an));
        CHECK(std::abs(an - fd) <=
              1e-4 * std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
    CHECK(max_grad > 0.0);
  }
}

TEST_CASE("training lowers the mean loss and is reproducible") {
  CssCode code = hgp_58();
  Dataset ds = gen_training_set(code, {0.05}, 140, 7);

  NbpTrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 32;
  cfg.iterations = 5;
  cfg.seed = 3;

  NbpTrainResult r = train_nbp(code, ds, cfg);
  CHECK(r.initial_loss > 0.0);
  REQUIRE(r.epoch_loss.size() == 1);
  CHECK(r.final_loss < r.initial_loss);
  CHECK(r.epochs_completed == 1);
  CHECK(r.stop_reason == "epochs");

  NbpTrainResult r2 = train_nbp(code, ds, cfg);
  CHECK(r2.initial_loss == r.initial_loss);
  CHECK(r2.final_loss == r.final_loss);
  CHECK(r2.epoch_loss[0] == r.epoch_loss[0]);
  for (const auto& [name, entry] : r.model.store.entries())
    CHECK(max_abs_diff(entry.value.v, r2.model.store.value(name).v) == 0.0);
}

TEST_CASE("zero training epochs returns the BP-equivalent model") {
  CssCode code = hgp_58();
  TannerGraph graph = tanner_graph(code);
  Dataset ds = gen_training_set(code, {0.05}, 120, 7);

  NbpTrainConfig cfg;
  cfg.epochs = 0;
  cfg.iterations = 6;
  NbpTrainResult r = train_nbp(code, ds, cfg);
  CHECK(r.epochs_completed == 0);
  CHECK(r.epoch_loss.empty());
  CHECK(r.initial_loss > 0.0);
  CHECK(r.final_loss == r.initial_loss);

  Rng rng(12);
  ErrorVector e = sample_error(code, {0.05}, rng);
  Syndrome s = syndrome_of(code, e);
  const double prior = prior_llr({0.05});
  BpConfig bp_cfg;
  bp_cfg.max_iter = 6;
  BpResult ref = bp_decode(graph, s, prior, bp_cfg);
  BpResult got = nbp_decode(graph, s, prior, r.model);
  CHECK(got.e_hat == ref.e_hat);
  CHECK(got.converged == ref.converged);
  CHECK(got.iterations_used == ref.iterations_used);
  CHECK(max_abs_diff(got.posterior_llr, ref.posterior_llr) == 0.0);
}

TEST_CASE("a tiny time budget stops training at an epoch boundary") {
  CssCode code = hgp_58();
  Dataset ds = gen_training_set(code, {0.05}, 120, 7);
  NbpTrainConfig cfg;
  cfg.epochs = 50;
  cfg.iterations = 2;
  cfg.time_budget_seconds = 1e-9;
  NbpTrainResult r = train_nbp(code, ds, cfg);
  CHECK(r.stop_reason == "budget");
  CHECK(r.epochs_completed == 1);
  CHECK(r.epoch_loss.size() == 1);
}

TEST_CASE("training rejects malformed inputs") {
  CssCode code = hgp_58();
  Dataset ds = gen_training_set(code, {0.05}, 120, 7);

  Dataset empty = ds;
  empty.entries.clear();
  CHECK_THROWS_AS(train_nbp(code, empty, {}), std::invalid_argument);

  CssCode other = hgp_129();
  Dataset mismatched = gen_training_set(other, {0.05}, 260, 7);
  CHECK_THROWS_AS(train_nbp(code, mismatched, {}), std::invalid_argument);

  NbpTrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_nbp(code, ds, bad), std::invalid_argument);

  // Degree-1 checks are fine for plain decoding but not for training.
  BinMatrix h = BinMatrix::from_rows({"110", "001"});
  TannerGraph g1 = tanner_graph(h);
  NbpModel m = make_nbp_model(g1, 2, false);
  nn::Tape tape;
  nn::TapeBinding bind(tape, m.store);
  CHECK_THROWS_AS(nbp_unrolled_loss(tape, bind, g1, m, BinVector(2), 1.0,
                                    BinVector(3), 20.0),
                  std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves the model exactly") {
  CssCode code = hgp_58();
  TannerGraph graph = tanner_graph(code);
  NbpModel model = make_nbp_model(graph, 3, true);
  Rng rng(41);
  randomize_model(model, rng, 0.6, 1.4);
  for (auto& [name, entry] : model.store.entries()) {
    for (double& x : entry.adam_m.v) x = rng.next_double() - 0.5;
    for (double& x : entry.adam_v.v) x = rng.next_double();
  }
  model.store.set_step(17);

  std::filesystem::path dir = std::filesystem::temp_directory_path() / "qldpc_nbp_test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "model.json").string();
  save_nbp_model(model, path, {{"note", "round trip"}});

  NbpModel loaded = load_nbp_model(path);
  CHECK(loaded.iterations == 3);
  CHECK(loaded.tied);
  CHECK(loaded.edge_count == model.edge_count);
  CHECK(loaded.var_count == model.var_count);
  CHECK(loaded.store.step() == 17);
  for (const auto& [name, entry] : model.store.entries()) {
    REQUIRE(loaded.store.has(name));
    CHECK(max_abs_diff(entry.value.v, loaded.store.value(name).v) == 0.0);
    CHECK(max_abs_diff(entry.adam_m.v, loaded.store.entries().at(name).adam_m.v) == 0.0);
    CHECK(max_abs_diff(entry.adam_v.v, loaded.store.entries().at(name).adam_v.v) == 0.0);
  }

  Rng srng(8);
  ErrorVector e = sample_error(code, {0.03}, srng);
  Syndrome s = syndrome_of(code, e);
  const double prior = prior_llr({0.03});
  BpResult a = nbp_decode(graph, s, prior, model);
  BpResult b = nbp_decode(graph, s, prior, loaded);
  CHECK(a.e_hat == b.e_hat);
  CHECK(max_abs_diff(a.posterior_llr, b.posterior_llr) == 0.0);

  // A checkpoint of some other model type is refused.
  std::string other_path = (dir / "other.json").string();
  nn::ParameterStore store;
  store.create("w", 2, 2);
  nn::save_checkpoint(store, other_path, {{"type", "something-else"}}, {});
  CHECK_THROWS_AS(load_nbp_model(other_path), std::runtime_error);

  // A model sized for one graph refuses to run on another.
  TannerGraph toy = tanner_graph(toy_matrix());
  CHECK_THROWS_AS(nbp_decode(toy, BinVector(toy.check_count), 1.0, model),
                  std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resumed training continues the optimizer step counter") {
  CssCode code = hgp_58();
  Dataset ds = gen_training_set(code, {0.05}, 120, 7);

  NbpTrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 32;
  cfg.iterations = 3;
  cfg.seed = 3;

  NbpTrainResult first = train_nbp(code, ds, cfg);
  const std::size_t steps_first = first.model.store.step();
  CHECK(steps_first == 4);  // ceil(120 / 32) optimizer steps

  std::filesystem::path dir = std::filesystem::temp_directory_path() / "qldpc_nbp_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "resume.json").string();
  save_nbp_model(first.model, path, {});

  NbpTrainConfig cont = cfg;
  cont.resume_checkpoint = path;
  cont.iterations = 12;  // ignored: architecture comes from the checkpoint
  NbpTrainResult second = train_nbp(code, ds, cont);
  CHECK(second.model.iterations == 3);
  CHECK(second.model.store.step() == 2 * steps_first);
  CHECK(second.initial_loss == first.final_loss);

  CssCode other = hgp_129();
  Dataset other_ds = gen_training_set(other, {0.05}, 2 * other.n + 1, 7);
  NbpTrainConfig bad = cont;
  bad.epochs = 1;
  CHECK_THROWS_AS(train_nbp(other, other_ds, bad), std::invalid_argument);
  std::filesystem::remove(path);
}
