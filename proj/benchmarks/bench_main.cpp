#include <benchmark/benchmark.h>

#include <vector>

#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/eval.hpp"
#include "qldpc/gf2.hpp"
#include "qldpc/gnn.hpp"
#include "qldpc/nbp.hpp"
#include "qldpc/osd.hpp"
#include "qldpc/rng.hpp"
#include "qldpc/tanner.hpp"

namespace {

using namespace qldpc;

CssCode hgp_code() {
  const auto [c7, c15] = bch_seed_codes();
  return build_hgp(c7, c15);
}

BinMatrix random_square(std::size_t n, Rng& rng) {
  BinMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (rng.next_bernoulli(0.5)) m.set(r, c, true);
  return m;
}

void bm_gf2_mat_mul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const BinMatrix a = random_square(n, rng);
  const BinMatrix b = random_square(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mat_mul(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_gf2_mat_mul)->Arg(129)->Arg(512);

void bm_gf2_rank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const BinMatrix a = random_square(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(rank(a));
}
BENCHMARK(bm_gf2_rank)->Arg(129)->Arg(512);

// One full 12-iteration BP decode on the [[129, 28]] decoding graph,
// syndromes drawn at p_f = 0.01.
void bm_bp_decode(benchmark::State& state) {
  const CssCode code = hgp_code();
  const TannerGraph graph = tanner_graph(code);
  const double prior = prior_llr({0.01});
  Rng rng(3);
  std::vector<Syndrome> syndromes;
  for (int i = 0; i < 64; ++i)
    syndromes.push_back(syndrome_of(code, sample_error(code, {0.01}, rng)));
  BpConfig cfg;
  cfg.early_stop = false;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bp_decode(graph, syndromes[i], prior, cfg));
    i = (i + 1) % syndromes.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_bp_decode);

// OSD-0 post-processing of the x block (rre factorization dominated).
void bm_osd_postprocess(benchmark::State& state) {
  const CssCode code = hgp_code();
  Rng rng(4);
  std::vector<std::pair<BinVector, std::vector<double>>> cases;
  for (int i = 0; i < 16; ++i) {
    const ErrorVector e = sample_error(code, {0.02}, rng);
    BinVector x(code.n);
    for (std::size_t b = 0; b < code.n; ++b) x.set(b, e.get(b));
    const BinVector s = mat_vec(code.hz, x);
    std::vector<double> llr(code.n);
    for (double& v : llr) v = 4.0 * (rng.next_double() - 0.25);
    cases.emplace_back(s, std::move(llr));
  }
  OsdConfig cfg;
  cfg.order = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [s, llr] = cases[i];
    benchmark::DoNotOptimize(osd_postprocess(code.hz, s, llr, cfg));
    i = (i + 1) % cases.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_osd_postprocess)->Arg(0)->Arg(2);

// One unit-weight NBP decode (same work shape as BP plus the readout scales).
void bm_nbp_decode(benchmark::State& state) {
  const CssCode code = hgp_code();
  const TannerGraph graph = tanner_graph(code);
  const NbpModel model = make_nbp_model(graph);
  const double prior = prior_llr({0.01});
  Rng rng(5);
  const Syndrome s = syndrome_of(code, sample_error(code, {0.01}, rng));
  NbpConfig cfg;
  cfg.early_stop = false;
  for (auto _ : state) benchmark::DoNotOptimize(nbp_decode(graph, s, prior, model, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_nbp_decode);

// Full GNN forward pass (decode) at a given embedding width, 6 rounds.
void bm_gnn_decode(benchmark::State& state) {
  const CssCode code = hgp_code();
  const TannerGraph graph = tanner_graph(code);
  GnnHyperparams hp;
  hp.embed_dim = static_cast<std::size_t>(state.range(0));
  hp.msg_dim = hp.embed_dim;
  const GnnModel model = make_gnn_model(graph, hp);
  Rng rng(6);
  const Syndrome s = syndrome_of(code, sample_error(code, {0.01}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(gnn_decode(graph, s, model));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_gnn_decode)->Arg(32)->Arg(128);

// Batched GNN decoding: higher throughput per syndrome than one-at-a-time.
void bm_gnn_decode_batch16(benchmark::State& state) {
  const CssCode code = hgp_code();
  const TannerGraph graph = tanner_graph(code);
  GnnHyperparams hp;
  hp.embed_dim = 64;
  hp.msg_dim = 64;
  const GnnModel model = make_gnn_model(graph, hp);
  Rng rng(7);
  std::vector<Syndrome> syndromes;
  for (int i = 0; i < 16; ++i)
    syndromes.push_back(syndrome_of(code, sample_error(code, {0.01}, rng)));
  for (auto _ : state)
    benchmark::DoNotOptimize(gnn_decode_batch(graph, syndromes, model, 16));
  state.SetItemsProcessed(state.iterations() * syndromes.size());
}
BENCHMARK(bm_gnn_decode_batch16);

// End-to-end sweep throughput: sample, decode, judge.
void bm_sweep_bp_point(benchmark::State& state) {
  const CssCode code = hgp_code();
  const auto decoder = make_bp_decoder(code);
  SweepConfig cfg;
  cfg.p_f_list = {0.01};
  cfg.trials = 200;
  cfg.batch = 200;
  for (auto _ : state) {
    cfg.seed += 1;  // fresh substreams each pass
    benchmark::DoNotOptimize(run_sweep(code, *decoder, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.trials);
}
BENCHMARK(bm_sweep_bp_point);

}  // namespace

BENCHMARK_MAIN();
