#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/nn/layers.hpp"
#include "qldpc/tanner.hpp"

namespace qldpc {

struct GnnHyperparams {
  std::size_t layers = 6;       // message-passing rounds K
  std::size_t embed_dim = 128;  // node embedding size s
  std::size_t msg_dim = 128;    // message size u
  double lr = 4e-4;
  std::size_t minibatch = 32;  // graphs per optimizer step
  double clip_norm = 0.5;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  bool untied = false;        // per-round parameter sets instead of shared
  bool simultaneous = false;  // variable half reads pre-round check embeddings
};

// Bipartite message-passing decoder over a Tanner graph: encoders lift
// variable index bits and syndrome bits to R^s, each round sends
// mlp2([h_src; h_dst]) along every edge, aggregates with scaled dot-product
// attention (query = destination embedding) and updates the destination
// with a GRU; checks update first, then variables see the new check
// embeddings. A final two-layer MLP + sigmoid reads out per-variable error
// probabilities. The readout's last layer starts at zero, so an untrained
// model outputs exactly 1/2 everywhere.
struct GnnModel {
  nn::ParameterStore store;
  GnnHyperparams hp;
  std::size_t var_count = 0;
  std::size_t check_count = 0;
  std::size_t feature_width = 0;  // index bits per variable node

  // "" when parameters are shared across rounds, "rNN." when untied.
  std::string round_prefix(std::size_t round) const;
};

// ceil(log2(var_count)), at least 1.
std::size_t index_bit_width(std::size_t var_count);

GnnModel make_gnn_model(const TannerGraph& graph, const GnnHyperparams& hp = {});

// Tape-level pieces, exposed so tests can probe intermediate states and the
// trainer can unroll all rounds on one tape. All of them validate that the
// model was built for `graph`.
struct GnnEmbeddings {
  nn::Tape::Var h_v = 0;  // (vars x s)
  nn::Tape::Var h_c = 0;  // (checks x s)
};

// Variable node i gets its index bits (LSB first, feature_width of them),
// check node j gets the scalar s_j; both pass through affine encoders.
GnnEmbeddings encode_features(nn::Tape& tape, nn::TapeBinding& bind,
                              const TannerGraph& graph, const BinVector& s,
                              const GnnModel& model);

// One round: update checks from variable->check messages, then variables
// from check->variable messages. round is 0-based and < hp.layers.
GnnEmbeddings message_pass_round(nn::Tape& tape, nn::TapeBinding& bind,
                                 const TannerGraph& graph, GnnEmbeddings h,
                                 const GnnModel& model, std::size_t round);

// Readout MLP applied to variable embeddings, pre-sigmoid (vars x 1).
nn::Tape::Var predict_logits(nn::Tape& tape, nn::TapeBinding& bind,
                             nn::Tape::Var h_v, const GnnModel& model);

struct DecodeOutput {
  std::vector<double> probabilities;  // p(e_i = 1 | s), length = vars
  ErrorVector e_hat;                  // probability > 1/2 -> 1 (ties -> 0)
  bool syndrome_matched = false;
};

DecodeOutput gnn_decode(const TannerGraph& graph, const BinVector& s,
                        const GnnModel& model);

// Decodes many syndromes by stacking up to `chunk` disjoint graph copies
// per forward pass; embeddings hop to a fresh tape between rounds, so peak
// memory stays at one round's activations. Identical numerics to
// gnn_decode.
std::vector<DecodeOutput> gnn_decode_batch(const TannerGraph& graph,
                                           const std::vector<BinVector>& syndromes,
                                           const GnnModel& model,
                                           std::size_t chunk = 16);

struct GnnTrainConfig {
  GnnHyperparams hp;
  /// Continue from this checkpoint instead of a fresh model. Architecture
  /// fields come from the checkpoint; lr, minibatch, clip_norm, epochs and
  /// seed still come from hp. Adam moments and the step counter carry over.
  std::string resume_checkpoint;
  std::size_t chunk = 8;             // graphs per tape; gradients accumulate
  double time_budget_seconds = 0.0;  // 0 = no cap; stops at epoch boundaries
  double plateau_eps = 1e-4;         // early stop when the best epoch loss
  std::size_t plateau_epochs = 10;   // improves less than eps for this long
  std::string log_csv_path;          // optional "epoch,mean_loss,wall_seconds"
};

struct GnnTrainResult {
  GnnModel model;
  double initial_loss = 0.0;  // first-minibatch mean BCE before any step
  std::vector<double> epoch_loss;  // running mean BCE per epoch
  std::size_t epochs_completed = 0;
  std::string stop_reason;  // "epochs" | "plateau" | "budget"
};

// Minibatch BCE (averaged over every variable node of the minibatch, per
// graph labels = error bits) with Adam and global-norm clipping; epoch
// order reshuffles from the seed.
GnnTrainResult train_gnn(const CssCode& code, const Dataset& dataset,
                         const GnnTrainConfig& config = {});

// Checkpoint wrappers (nn-engine format).
void save_gnn_model(const GnnModel& model, const std::string& path,
                    const nlohmann::json& metadata);
GnnModel load_gnn_model(const std::string& path);

}  // namespace qldpc
