#include "qldpc/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qldpc/nn/checkpoint.hpp"
#include "qldpc/nn/optim.hpp"
#include "qldpc/rng.hpp"

namespace qldpc {

using nn::Tape;

std::size_t index_bit_width(std::size_t var_count) {
  std::size_t w = 1;
  while ((std::size_t{1} << w) < var_count) ++w;
  return w;
}

std::string GnnModel::round_prefix(std::size_t round) const {
  if (!hp.untied) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%02zu.", round);
  return buf;
}

GnnModel make_gnn_model(const TannerGraph& graph, const GnnHyperparams& hp) {
  if (hp.layers < 1 || hp.embed_dim < 1 || hp.msg_dim < 1)
    throw std::invalid_argument("gnn: layers, embed_dim and msg_dim must be >= 1");
  GnnModel m;
  m.hp = hp;
  m.var_count = graph.var_count;
  m.check_count = graph.check_count;
  m.feature_width = index_bit_width(graph.var_count);

  Rng rng(derive_seed(hp.seed, 0x676e6e));
  const std::size_t s = hp.embed_dim;
  const std::size_t u = hp.msg_dim;
  m.store.create_uniform("enc_v.w", m.feature_width, s, rng);
  m.store.create("enc_v.b", 1, s);
  m.store.create_uniform("enc_c.w", 1, s, rng);
  m.store.create("enc_c.b", 1, s);
  const std::size_t sets = hp.untied ? hp.layers : 1;
  for (std::size_t r = 0; r < sets; ++r) {
    const std::string R = hp.untied ? m.round_prefix(r) : "";
    for (const std::string side : {"layer_c", "layer_v"}) {
      nn::make_mlp2(m.store, R + side + ".msg", 2 * s, s, u, rng);
      nn::make_attention(m.store, R + side + ".att", s, u, rng);
      nn::make_gru(m.store, R + side + ".gru", u, s, rng);
    }
  }
  nn::make_mlp2(m.store, "pred", s, s, 1, rng);
  // Zeroing the readout's last layer makes every untrained output exactly
  // 1/2 while leaving its hidden layer trainable through w2's gradient.
  m.store.value("pred.w2") = nn::Tensor(s, 1);
  return m;
}

namespace {

// Edge-index arrays for `graphs` disjoint copies of one Tanner graph, the
// shape every forward pass (single decode, batched decode, training chunk)
// runs on.
struct Layout {
  std::size_t graphs = 1;
  std::size_t vars = 0;    // per copy
  std::size_t checks = 0;  // per copy
  std::vector<std::size_t> var_of_edge;
  std::vector<std::size_t> check_of_edge;

  std::size_t total_vars() const { return graphs * vars; }
  std::size_t total_checks() const { return graphs * checks; }
};

Layout make_layout(const TannerGraph& g, std::size_t graphs) {
  Layout l;
  l.graphs = graphs;
  l.vars = g.var_count;
  l.checks = g.check_count;
  l.var_of_edge.reserve(graphs * g.edge_count());
  l.check_of_edge.reserve(graphs * g.edge_count());
  for (std::size_t b = 0; b < graphs; ++b) {
    for (const TannerGraph::Edge& e : g.edges) {
      l.var_of_edge.push_back(b * g.var_count + e.var);
      l.check_of_edge.push_back(b * g.check_count + e.check);
    }
  }
  return l;
}

// Index bits are per-copy, so every copy gets the same feature rows.
nn::Tensor tiled_var_features(const TannerGraph& g, std::size_t graphs,
                              std::size_t width) {
  nn::Tensor x(graphs * g.var_count, width);
  for (std::size_t b = 0; b < graphs; ++b)
    for (std::size_t v = 0; v < g.var_count; ++v)
      for (std::size_t bit = 0; bit < width; ++bit)
        x.at(b * g.var_count + v, bit) = (v >> bit) & 1 ? 1.0 : 0.0;
  return x;
}

void validate_graph_model(const TannerGraph& graph, const GnnModel& model) {
  if (model.var_count != graph.var_count ||
      model.check_count != graph.check_count) {
    throw std::invalid_argument(
        "gnn: model built for a different graph (" +
        std::to_string(model.var_count) + " vars/" +
        std::to_string(model.check_count) + " checks vs " +
        std::to_string(graph.var_count) + "/" +
        std::to_string(graph.check_count) + ")");
  }
}

// Decoding only reads parameter values; TapeBinding wants a mutable store
// because the training path pushes gradients back through the same type.
nn::ParameterStore& decode_store(const GnnModel& model) {
  return const_cast<GnnModel&>(model).store;
}

GnnEmbeddings encode_impl(Tape& t, nn::TapeBinding& bind, nn::Tensor var_feats,
                          nn::Tensor check_feats) {
  Tape::Var xv = t.constant(std::move(var_feats));
  Tape::Var xc = t.constant(std::move(check_feats));
  GnnEmbeddings h;
  h.h_v = t.add_rowvec(t.matmul(xv, bind["enc_v.w"]), bind["enc_v.b"]);
  h.h_c = t.add_rowvec(t.matmul(xc, bind["enc_c.w"]), bind["enc_c.b"]);
  return h;
}

GnnEmbeddings round_impl(Tape& t, nn::TapeBinding& bind, const Layout& l,
                         GnnEmbeddings h, const GnnModel& model,
                         std::size_t round) {
  const std::string R = model.round_prefix(round);

  // Half 1: variable -> check messages, checks update.
  nn::Mlp2Params msg_c = nn::bind_mlp2(bind, R + "layer_c.msg");
  nn::AttnParams att_c = nn::bind_attention(bind, R + "layer_c.att");
  nn::GruParams gru_c = nn::bind_gru(bind, R + "layer_c.gru");
  Tape::Var x_c = t.concat_cols(t.gather_rows(h.h_v, l.var_of_edge),
                                t.gather_rows(h.h_c, l.check_of_edge));
  Tape::Var m_c = nn::mlp2(t, msg_c, x_c);
  Tape::Var agg_c = nn::attention_aggregate(t, att_c, h.h_c, m_c,
                                            l.check_of_edge, l.total_checks());
  Tape::Var h_c_new = nn::gru_cell(t, gru_c, agg_c, h.h_c);

  // Half 2: check -> variable messages from the updated check embeddings
  // (or the pre-round ones in the simultaneous ablation).
  Tape::Var c_src = model.hp.simultaneous ? h.h_c : h_c_new;
  nn::Mlp2Params msg_v = nn::bind_mlp2(bind, R + "layer_v.msg");
  nn::AttnParams att_v = nn::bind_attention(bind, R + "layer_v.att");
  nn::GruParams gru_v = nn::bind_gru(bind, R + "layer_v.gru");
  Tape::Var x_v = t.concat_cols(t.gather_rows(c_src, l.check_of_edge),
                                t.gather_rows(h.h_v, l.var_of_edge));
  Tape::Var m_v = nn::mlp2(t, msg_v, x_v);
  Tape::Var agg_v = nn::attention_aggregate(t, att_v, h.h_v, m_v,
                                            l.var_of_edge, l.total_vars());
  GnnEmbeddings out;
  out.h_c = h_c_new;
  out.h_v = nn::gru_cell(t, gru_v, agg_v, h.h_v);
  return out;
}

bool syndrome_matches(const TannerGraph& graph, const BinVector& e_hat,
                      const BinVector& s) {
  for (std::size_t c = 0; c < graph.check_count; ++c) {
    bool parity = false;
    for (std::size_t v : graph.check_vars[c]) parity ^= e_hat.get(v);
    if (parity != s.get(c)) return false;
  }
  return true;
}

}  // namespace

GnnEmbeddings encode_features(Tape& tape, nn::TapeBinding& bind,
                              const TannerGraph& graph, const BinVector& s,
                              const GnnModel& model) {
  validate_graph_model(graph, model);
  if (s.size() != graph.check_count)
    throw std::invalid_argument("gnn: syndrome length != check count");
  nn::Tensor cf(graph.check_count, 1);
  for (std::size_t c = 0; c < graph.check_count; ++c)
    cf.v[c] = s.get(c) ? 1.0 : 0.0;
  return encode_impl(tape, bind, tiled_var_features(graph, 1, model.feature_width),
                     std::move(cf));
}

GnnEmbeddings message_pass_round(Tape& tape, nn::TapeBinding& bind,
                                 const TannerGraph& graph, GnnEmbeddings h,
                                 const GnnModel& model, std::size_t round) {
  validate_graph_model(graph, model);
  if (round >= model.hp.layers)
    throw std::invalid_argument("gnn: round index past the layer count");
  return round_impl(tape, bind, make_layout(graph, 1), h, model, round);
}

Tape::Var predict_logits(Tape& tape, nn::TapeBinding& bind, Tape::Var h_v,
                         const GnnModel& model) {
  (void)model;
  nn::Mlp2Params pred = nn::bind_mlp2(bind, "pred");
  return nn::mlp2(tape, pred, h_v);
}

std::vector<DecodeOutput> gnn_decode_batch(const TannerGraph& graph,
                                           const std::vector<BinVector>& syndromes,
                                           const GnnModel& model,
                                           std::size_t chunk) {
  validate_graph_model(graph, model);
  if (chunk < 1) throw std::invalid_argument("gnn: chunk must be >= 1");
  for (const BinVector& s : syndromes)
    if (s.size() != graph.check_count)
      throw std::invalid_argument("gnn: syndrome length != check count");

  std::vector<DecodeOutput> results;
  results.reserve(syndromes.size());
  nn::ParameterStore& store = decode_store(model);

  for (std::size_t start = 0; start < syndromes.size(); start += chunk) {
    const std::size_t b = std::min(chunk, syndromes.size() - start);
    Layout l = make_layout(graph, b);
    nn::Tensor cf(b * graph.check_count, 1);
    for (std::size_t g = 0; g < b; ++g)
      for (std::size_t c = 0; c < graph.check_count; ++c)
        cf.v[g * graph.check_count + c] = syndromes[start + g].get(c) ? 1.0 : 0.0;

    // Each stage runs on its own tape and carries only the embedding
    // values forward, so peak memory is one round's activations.
    nn::Tensor hv_val, hc_val;
    {
      Tape tape;
      nn::TapeBinding bind(tape, store);
      GnnEmbeddings h = encode_impl(
          tape, bind, tiled_var_features(graph, b, model.feature_width),
          std::move(cf));
      hv_val = tape.value(h.h_v);
      hc_val = tape.value(h.h_c);
    }
    for (std::size_t round = 0; round < model.hp.layers; ++round) {
      Tape tape;
      nn::TapeBinding bind(tape, store);
      GnnEmbeddings h;
      h.h_v = tape.constant(std::move(hv_val));
      h.h_c = tape.constant(std::move(hc_val));
      h = round_impl(tape, bind, l, h, model, round);
      hv_val = tape.value(h.h_v);
      hc_val = tape.value(h.h_c);
    }
    Tape tape;
    nn::TapeBinding bind(tape, store);
    Tape::Var probs = tape.sigmoid(
        predict_logits(tape, bind, tape.constant(std::move(hv_val)), model));
    const nn::Tensor& pv = tape.value(probs);

    for (std::size_t g = 0; g < b; ++g) {
      DecodeOutput out;
      out.probabilities.resize(graph.var_count);
      out.e_hat = BinVector(graph.var_count);
      for (std::size_t v = 0; v < graph.var_count; ++v) {
        const double p = pv.v[g * graph.var_count + v];
        out.probabilities[v] = p;
        out.e_hat.set(v, p > 0.5);
      }
      out.syndrome_matched = syndrome_matches(graph, out.e_hat, syndromes[start + g]);
      results.push_back(std::move(out));
    }
  }
  return results;
}

DecodeOutput gnn_decode(const TannerGraph& graph, const BinVector& s,
                        const GnnModel& model) {
  return gnn_decode_batch(graph, {s}, model, 1).front();
}

GnnTrainResult train_gnn(const CssCode& code, const Dataset& dataset,
                         const GnnTrainConfig& config) {
  if (dataset.entries.empty()) throw std::invalid_argument("gnn: empty dataset");
  TannerGraph graph = tanner_graph(code);
  if (dataset.bits != graph.var_count || dataset.checks != graph.check_count)
    throw std::invalid_argument("gnn: dataset does not match the code");
  GnnHyperparams hp = config.hp;
  if (hp.minibatch < 1) throw std::invalid_argument("gnn: minibatch must be >= 1");
  if (config.chunk < 1) throw std::invalid_argument("gnn: chunk must be >= 1");
  const std::size_t chunk = std::min(config.chunk, hp.minibatch);

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  GnnTrainResult result;
  if (config.resume_checkpoint.empty()) {
    result.model = make_gnn_model(graph, hp);
  } else {
    result.model = load_gnn_model(config.resume_checkpoint);
    if (result.model.var_count != graph.var_count ||
        result.model.check_count != graph.check_count)
      throw std::invalid_argument("gnn: resume checkpoint was built for a different graph");
    hp.layers = result.model.hp.layers;
    hp.embed_dim = result.model.hp.embed_dim;
    hp.msg_dim = result.model.hp.msg_dim;
    hp.untied = result.model.hp.untied;
    hp.simultaneous = result.model.hp.simultaneous;
    result.model.hp = hp;
  }
  GnnModel& model = result.model;

  const std::size_t n_total = dataset.entries.size();
  const double label_count = (double)graph.var_count;

  // Forward (and optionally backward) over one chunk of dataset entries on
  // a single tape. `divisor` spreads one minibatch's averaging across its
  // chunks; 0 means average over just these graphs.
  auto chunk_loss = [&](const std::size_t* idx, std::size_t b, double divisor,
                        bool backward) {
    Layout l = make_layout(graph, b);
    nn::Tensor cf(b * graph.check_count, 1);
    nn::Tensor labels(b * graph.var_count, 1);
    for (std::size_t g = 0; g < b; ++g) {
      const DatasetEntry& entry = dataset.entries[idx[g]];
      for (std::size_t c = 0; c < graph.check_count; ++c)
        cf.v[g * graph.check_count + c] = entry.s.get(c) ? 1.0 : 0.0;
      for (std::size_t v = 0; v < graph.var_count; ++v)
        labels.v[g * graph.var_count + v] = entry.e.get(v) ? 1.0 : 0.0;
    }
    Tape tape;
    nn::TapeBinding bind(tape, model.store);
    GnnEmbeddings h = encode_impl(
        tape, bind, tiled_var_features(graph, b, model.feature_width),
        std::move(cf));
    for (std::size_t round = 0; round < hp.layers; ++round)
      h = round_impl(tape, bind, l, h, model, round);
    Tape::Var probs = tape.sigmoid(predict_logits(tape, bind, h.h_v, model));
    Tape::Var loss =
        nn::bce_loss(tape, probs, tape.constant(std::move(labels)), 1e-7, divisor);
    const double val = tape.value(loss).v[0];
    if (backward) {
      tape.backward(loss);
      bind.accumulate_grads();
    }
    return val;
  };

  // Mean loss of the first minibatch before any update (exactly log 2 with
  // the zero-initialized readout).
  {
    const std::size_t count = std::min(hp.minibatch, n_total);
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    double acc = 0.0;
    for (std::size_t cs = 0; cs < count; cs += chunk) {
      const std::size_t cb = std::min(chunk, count - cs);
      acc += chunk_loss(idx.data() + cs, cb, 0.0, false) * ((double)cb * label_count);
    }
    result.initial_loss = acc / ((double)count * label_count);
  }

  std::ofstream log;
  if (!config.log_csv_path.empty()) {
    log.open(config.log_csv_path, std::ios::trunc);
    if (!log) throw std::runtime_error("gnn: cannot write " + config.log_csv_path);
    log << "epoch,mean_loss,wall_seconds\n" << std::flush;
  }

  std::vector<std::size_t> order(n_total);
  for (std::size_t i = 0; i < n_total; ++i) order[i] = i;
  result.stop_reason = "epochs";
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_improve = 0;

  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    Rng rng(derive_seed(hp.seed, 0x676e6e, epoch));
    rng.shuffle(order);
    double epoch_acc = 0.0;
    for (std::size_t start = 0; start < n_total; start += hp.minibatch) {
      const std::size_t stop = std::min(start + hp.minibatch, n_total);
      const double divisor = (double)(stop - start) * label_count;
      model.store.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t cs = start; cs < stop; cs += chunk) {
        const std::size_t cb = std::min(chunk, stop - cs);
        batch_loss += chunk_loss(order.data() + cs, cb, divisor, true);
      }
      nn::clip_global_norm(model.store, hp.clip_norm);
      nn::AdamConfig adam;
      adam.lr = hp.lr;
      nn::adam_step(model.store, adam);
      epoch_acc += batch_loss * divisor;
    }
    const double mean = epoch_acc / ((double)n_total * label_count);
    result.epoch_loss.push_back(mean);
    result.epochs_completed = epoch;
    if (log) log << epoch << ',' << mean << ',' << elapsed() << '\n' << std::flush;

    if (mean < best - config.plateau_eps) {
      best = mean;
      since_improve = 0;
    } else if (++since_improve >= config.plateau_epochs) {
      result.stop_reason = "plateau";
      break;
    }
    if (config.time_budget_seconds > 0.0) {
      const double per_epoch = elapsed() / (double)epoch;
      if (elapsed() + per_epoch > config.time_budget_seconds) {
        result.stop_reason = "budget";
        break;
      }
    }
  }
  return result;
}

void save_gnn_model(const GnnModel& model, const std::string& path,
                    const nlohmann::json& metadata) {
  nlohmann::json hp{{"type", "gnn"},
                    {"layers", model.hp.layers},
                    {"embed_dim", model.hp.embed_dim},
                    {"msg_dim", model.hp.msg_dim},
                    {"lr", model.hp.lr},
                    {"minibatch", model.hp.minibatch},
                    {"clip_norm", model.hp.clip_norm},
                    {"epochs", model.hp.epochs},
                    {"seed", model.hp.seed},
                    {"untied", model.hp.untied},
                    {"simultaneous", model.hp.simultaneous},
                    {"vars", model.var_count},
                    {"checks", model.check_count},
                    {"feature_width", model.feature_width}};
  nn::save_checkpoint(model.store, path, hp, metadata);
}

GnnModel load_gnn_model(const std::string& path) {
  GnnModel model;
  nn::CheckpointInfo info = nn::load_checkpoint(model.store, path);
  const nlohmann::json& hp = info.hyperparams;
  if (hp.value("type", "") != "gnn")
    throw std::runtime_error("gnn: " + path + " is not a GNN checkpoint");
  model.hp.layers = hp.at("layers").get<std::size_t>();
  model.hp.embed_dim = hp.at("embed_dim").get<std::size_t>();
  model.hp.msg_dim = hp.at("msg_dim").get<std::size_t>();
  model.hp.lr = hp.at("lr").get<double>();
  model.hp.minibatch = hp.at("minibatch").get<std::size_t>();
  model.hp.clip_norm = hp.at("clip_norm").get<double>();
  model.hp.epochs = hp.at("epochs").get<std::size_t>();
  model.hp.seed = hp.at("seed").get<std::uint64_t>();
  model.hp.untied = hp.at("untied").get<bool>();
  model.hp.simultaneous = hp.at("simultaneous").get<bool>();
  model.var_count = hp.at("vars").get<std::size_t>();
  model.check_count = hp.at("checks").get<std::size_t>();
  model.feature_width = hp.at("feature_width").get<std::size_t>();
  return model;
}

}  // namespace qldpc
