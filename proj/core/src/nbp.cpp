#include "qldpc/nbp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "check_update.hpp"
#include "qldpc/nn/checkpoint.hpp"
#include "qldpc/nn/optim.hpp"
#include "qldpc/rng.hpp"

namespace qldpc {

using detail::check_update_into;
using detail::clamp_llr;

std::string NbpModel::iter_prefix(std::size_t iter) const {
  if (tied) return "shared";
  char buf[16];
  std::snprintf(buf, sizeof buf, "it%02zu", iter);
  return buf;
}

NbpModel make_nbp_model(const TannerGraph& graph, std::size_t iterations, bool tied) {
  if (iterations < 1) throw std::invalid_argument("nbp: iterations must be >= 1");
  NbpModel m;
  m.iterations = iterations;
  m.tied = tied;
  m.edge_count = graph.edge_count();
  m.var_count = graph.var_count;
  std::size_t sets = tied ? 1 : iterations;
  for (std::size_t t = 1; t <= sets; ++t) {
    std::string prefix = tied ? "shared" : m.iter_prefix(t);
    m.store.create(prefix + ".w", m.edge_count, 1) = nn::Tensor(m.edge_count, 1, 1.0);
    m.store.create(prefix + ".b", m.var_count, 1) = nn::Tensor(m.var_count, 1, 1.0);
  }
  m.store.create("out.w", m.edge_count, 1) = nn::Tensor(m.edge_count, 1, 1.0);
  m.store.create("out.b", m.var_count, 1) = nn::Tensor(m.var_count, 1, 1.0);
  return m;
}

namespace {

void validate_model(const TannerGraph& graph, const NbpModel& model) {
  if (model.edge_count != graph.edge_count() || model.var_count != graph.var_count) {
    throw std::invalid_argument("nbp: model built for a different graph (" +
                                std::to_string(model.edge_count) + " edges/" +
                                std::to_string(model.var_count) + " vars vs " +
                                std::to_string(graph.edge_count()) + "/" +
                                std::to_string(graph.var_count) + ")");
  }
}

}  // namespace

BpResult nbp_decode(const TannerGraph& graph, const BinVector& s, double prior_llr,
                    const NbpModel& model, const NbpConfig& config, BpTrace* trace) {
  if (s.size() != graph.check_count)
    throw std::invalid_argument("nbp_decode: syndrome length != check count");
  if (!(config.llr_clamp > 0.0))
    throw std::invalid_argument("nbp_decode: llr_clamp must be > 0");
  validate_model(graph, model);

  const std::size_t edges = graph.edge_count();
  const nn::Tensor& w_out = model.store.value("out.w");
  const nn::Tensor& b_out = model.store.value("out.b");

  std::vector<double> c2v(edges, 0.0), v2c(edges, 0.0);
  std::vector<double> post(graph.var_count);
  std::vector<double> in_buf, out_buf, prefix, suffix;
  BinVector e_hat(graph.var_count);

  // Mirrors bp_decode exactly; multiplying by the unit-initialized weights
  // is an exact no-op, which is what makes the BP equivalence bitwise.
  auto refresh_posteriors = [&] {
    for (std::size_t v = 0; v < graph.var_count; ++v) {
      double total = 0.0;
      for (std::size_t e : graph.var_edges[v]) total += w_out.v[e] * c2v[e];
      post[v] = b_out.v[v] * prior_llr + total;
      e_hat.set(v, post[v] < 0.0);
    }
  };
  auto syndrome_matches = [&] {
    for (std::size_t c = 0; c < graph.check_count; ++c) {
      bool parity = false;
      for (std::size_t v : graph.check_vars[c]) parity ^= e_hat.get(v);
      if (parity != s.get(c)) return false;
    }
    return true;
  };
  auto make_result = [&](bool converged, std::size_t iters) {
    BpResult r;
    r.e_hat = e_hat;
    r.posterior_llr = post;
    r.converged = converged;
    r.iterations_used = iters;
    return r;
  };

  refresh_posteriors();
  if (trace) trace->posterior.push_back(post);
  if (config.early_stop && syndrome_matches()) return make_result(true, 0);

  for (std::size_t iter = 1; iter <= model.iterations; ++iter) {
    const nn::Tensor& w = model.store.value(model.iter_prefix(iter) + ".w");
    const nn::Tensor& b = model.store.value(model.iter_prefix(iter) + ".b");
    for (std::size_t v = 0; v < graph.var_count; ++v) {
      double total = 0.0;
      for (std::size_t e : graph.var_edges[v]) total += w.v[e] * c2v[e];
      for (std::size_t e : graph.var_edges[v])
        v2c[e] = clamp_llr(b.v[v] * prior_llr + (total - w.v[e] * c2v[e]),
                           config.llr_clamp);
    }
    for (std::size_t c = 0; c < graph.check_count; ++c) {
      const std::vector<std::size_t>& ce = graph.check_edges[c];
      in_buf.resize(ce.size());
      out_buf.resize(ce.size());
      for (std::size_t i = 0; i < ce.size(); ++i) in_buf[i] = v2c[ce[i]];
      check_update_into(in_buf, s.get(c), config.llr_clamp, out_buf, prefix, suffix);
      for (std::size_t i = 0; i < ce.size(); ++i) c2v[ce[i]] = out_buf[i];
    }
    refresh_posteriors();
    if (trace) {
      trace->v2c.push_back(v2c);
      trace->c2v.push_back(c2v);
      trace->posterior.push_back(post);
    }
    const bool match = syndrome_matches();
    if ((config.early_stop && match) || iter == model.iterations)
      return make_result(match, iter);
  }
  return make_result(false, model.iterations);  // unreachable
}

nn::Tape::Var nbp_unrolled_loss(nn::Tape& tape, nn::TapeBinding& bind,
                                const TannerGraph& graph, const NbpModel& model,
                                const BinVector& s, double prior_llr,
                                const BinVector& error, double llr_clamp,
                                double divisor) {
  using nn::Tape;
  validate_model(graph, model);
  if (s.size() != graph.check_count || error.size() != graph.var_count) {
    throw std::invalid_argument("nbp: sample does not match the graph");
  }
  const std::size_t edges = graph.edge_count();
  const std::size_t vars = graph.var_count;

  std::vector<std::size_t> var_of_edge(edges), check_offsets{0};
  for (std::size_t e = 0; e < edges; ++e) var_of_edge[e] = graph.edges[e].var;
  for (std::size_t c = 0; c < graph.check_count; ++c) {
    if (graph.check_edges[c].size() < 2) {
      throw std::invalid_argument("nbp: training needs check degrees >= 2");
    }
    check_offsets.push_back(check_offsets.back() + graph.check_edges[c].size());
  }

  nn::Tensor prior(vars, 1, prior_llr);
  nn::Tensor sgn(edges, 1);
  for (std::size_t e = 0; e < edges; ++e) {
    sgn.v[e] = s.get(graph.edges[e].check) ? -1.0 : 1.0;
  }
  nn::Tensor labels(vars, 1);
  for (std::size_t v = 0; v < vars; ++v) labels.v[v] = error.get(v) ? 1.0 : 0.0;

  Tape::Var prior_v = tape.constant(std::move(prior));
  Tape::Var sgn_v = tape.constant(std::move(sgn));
  Tape::Var c2v = 0;
  bool have_c2v = false;

  for (std::size_t iter = 1; iter <= model.iterations; ++iter) {
    std::string prefix = model.iter_prefix(iter);
    Tape::Var w = bind[prefix + ".w"];
    Tape::Var b = bind[prefix + ".b"];
    Tape::Var scaled_prior = tape.gather_rows(tape.mul(prior_v, b), var_of_edge);
    Tape::Var v2c_raw = 0;
    if (!have_c2v) {
      v2c_raw = scaled_prior;  // first sweep sees zero check messages
    } else {
      Tape::Var weighted = tape.mul(c2v, w);
      Tape::Var totals = tape.segment_sum(weighted, var_of_edge, vars);
      Tape::Var loo = tape.sub(tape.gather_rows(totals, var_of_edge), weighted);
      v2c_raw = tape.add(scaled_prior, loo);
    }
    Tape::Var v2c = tape.clamp(v2c_raw, -llr_clamp, llr_clamp);
    // Check half in the tanh-product form (edge ids are check-sorted, so
    // contiguous runs are exactly the per-check neighborhoods).
    Tape::Var th = tape.tanh_op(tape.scale(v2c, 0.5));
    Tape::Var prod = tape.leave_one_out_prod(th, check_offsets);
    Tape::Var msg = tape.mul(sgn_v, tape.scale(tape.atanh_op(prod), 2.0));
    c2v = tape.clamp(msg, -llr_clamp, llr_clamp);
    have_c2v = true;
  }

  Tape::Var w_out = bind["out.w"];
  Tape::Var b_out = bind["out.b"];
  Tape::Var totals = tape.segment_sum(tape.mul(c2v, w_out), var_of_edge, vars);
  Tape::Var mu = tape.add(tape.mul(prior_v, b_out), totals);
  Tape::Var probs = tape.sigmoid(tape.scale(mu, -1.0));
  return nn::bce_loss(tape, probs, tape.constant(std::move(labels)), 1e-7, divisor);
}

NbpTrainResult train_nbp(const CssCode& code, const Dataset& dataset,
                         const NbpTrainConfig& config) {
  if (dataset.entries.empty()) throw std::invalid_argument("nbp: empty dataset");
  TannerGraph graph = tanner_graph(code);
  if (dataset.bits != graph.var_count || dataset.checks != graph.check_count) {
    throw std::invalid_argument("nbp: dataset does not match the code");
  }
  if (config.batch_size < 1) throw std::invalid_argument("nbp: batch_size must be >= 1");
  const double prior = prior_llr({dataset.p_f});
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  NbpTrainResult result;
  if (config.resume_checkpoint.empty()) {
    result.model = make_nbp_model(graph, config.iterations, config.tied);
  } else {
    result.model = load_nbp_model(config.resume_checkpoint);
    if (result.model.var_count != graph.var_count ||
        result.model.edge_count != graph.edge_count())
      throw std::invalid_argument("nbp: resume checkpoint was built for a different graph");
  }
  NbpModel& model = result.model;

  const std::size_t n_total = dataset.entries.size();
  const double label_count = (double)graph.var_count;

  // Mean loss over the whole dataset at the current parameters.
  auto dataset_loss = [&] {
    double acc = 0.0;
    for (const DatasetEntry& entry : dataset.entries) {
      nn::Tape tape;
      nn::TapeBinding bind(tape, model.store);
      nn::Tape::Var loss = nbp_unrolled_loss(tape, bind, graph, model, entry.s,
                                             prior, entry.e, config.llr_clamp);
      acc += tape.value(loss).v[0] * label_count;
    }
    return acc / ((double)n_total * label_count);
  };
  result.initial_loss = dataset_loss();

  std::vector<std::size_t> order(n_total);
  for (std::size_t i = 0; i < n_total; ++i) order[i] = i;
  result.stop_reason = "epochs";

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0x6e62, epoch));
    rng.shuffle(order);
    double epoch_acc = 0.0;
    for (std::size_t start = 0; start < n_total; start += config.batch_size) {
      std::size_t stop = std::min(start + config.batch_size, n_total);
      double divisor = (double)(stop - start) * label_count;
      model.store.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const DatasetEntry& entry = dataset.entries[order[i]];
        nn::Tape tape;
        nn::TapeBinding bind(tape, model.store);
        nn::Tape::Var loss = nbp_unrolled_loss(tape, bind, graph, model, entry.s,
                                               prior, entry.e, config.llr_clamp,
                                               divisor);
        batch_loss += tape.value(loss).v[0];
        tape.backward(loss);
        bind.accumulate_grads();
      }
      nn::clip_global_norm(model.store, config.clip_norm);
      nn::AdamConfig adam;
      adam.lr = config.lr;
      nn::adam_step(model.store, adam);
      epoch_acc += batch_loss * divisor;
    }
    result.epoch_loss.push_back(epoch_acc / ((double)n_total * label_count));
    result.epochs_completed = epoch;
    if (config.time_budget_seconds > 0.0) {
      double per_epoch = elapsed() / (double)epoch;
      if (elapsed() + per_epoch > config.time_budget_seconds) {
        result.stop_reason = "budget";
        break;
      }
    }
  }
  result.final_loss = config.epochs == 0 ? result.initial_loss : dataset_loss();
  return result;
}

void save_nbp_model(const NbpModel& model, const std::string& path,
                    const nlohmann::json& metadata) {
  nlohmann::json hp{{"type", "nbp"},
                    {"iterations", model.iterations},
                    {"tied", model.tied},
                    {"edges", model.edge_count},
                    {"vars", model.var_count}};
  nn::save_checkpoint(model.store, path, hp, metadata);
}

NbpModel load_nbp_model(const std::string& path) {
  NbpModel model;
  nn::CheckpointInfo info = nn::load_checkpoint(model.store, path);
  if (info.hyperparams.value("type", "") != "nbp") {
    throw std::runtime_error("nbp: " + path + " is not an NBP checkpoint");
  }
  model.iterations = info.hyperparams.at("iterations").get<std::size_t>();
  model.tied = info.hyperparams.at("tied").get<bool>();
  model.edge_count = info.hyperparams.at("edges").get<std::size_t>();
  model.var_count = info.hyperparams.at("vars").get<std::size_t>();
  return model;
}

}  // namespace qldpc
