#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/nn/layers.hpp"
#include "qldpc/tanner.hpp"

namespace qldpc {

// Neural BP: plain BP with a learnable weight per (edge, iteration) on the
// incoming check messages, a learnable prior scale per (variable,
// iteration), and a separate weight/scale set for the final readout.
// Unit initialization reproduces bp_decode message-for-message.
struct NbpModel {
  nn::ParameterStore store;
  std::size_t iterations = 12;
  bool tied = false;  // one shared per-iteration set instead of T sets
  std::size_t edge_count = 0;
  std::size_t var_count = 0;

  // Parameter-name helpers ("itNN" / "shared" / "out").
  std::string iter_prefix(std::size_t iter) const;
  static std::string readout_prefix() { return "out"; }
};

// All weights and scales start at 1 (the BP-equivalent point).
NbpModel make_nbp_model(const TannerGraph& graph, std::size_t iterations = 12,
                        bool tied = false);

struct NbpConfig {
  double llr_clamp = 20.0;
  bool early_stop = true;
};

// Same loop structure, clamp rule, tie rule and convergence flag as
// bp_decode; per-iteration posteriors use the readout weight set.
BpResult nbp_decode(const TannerGraph& graph, const BinVector& s, double prior_llr,
                    const NbpModel& model, const NbpConfig& config = {},
                    BpTrace* trace = nullptr);

struct NbpTrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 4e-4;
  double clip_norm = 0.5;
  double llr_clamp = 20.0;
  std::size_t iterations = 12;
  bool tied = false;
  std::uint64_t seed = 1;
  double time_budget_seconds = 0.0;  // 0 = no budget cap
  /// Continue from this checkpoint instead of the BP-equivalent init;
  /// iterations and tie structure come from the checkpoint, Adam moments
  /// and the step counter carry over.
  std::string resume_checkpoint;
};

struct NbpTrainResult {
  NbpModel model;
  double initial_loss = 0.0;  // dataset mean BCE at the starting parameters
  double final_loss = 0.0;    // dataset mean BCE of the returned model
  std::vector<double> epoch_loss;  // running mean BCE per epoch, in epoch order
  std::size_t epochs_completed = 0;
  std::string stop_reason;  // "epochs" | "budget"
};

// Unrolls the decoder on a tape and minimizes BCE between sigmoid(-mu_v)
// and the error labels with Adam + global-norm clipping. Requires every
// check of the code's decoding graph to touch at least two variables.
NbpTrainResult train_nbp(const CssCode& code, const Dataset& dataset,
                         const NbpTrainConfig& config = {});

// Tape-unrolled forward pass for one sample; returns the scalar BCE loss
// node (labels averaged over `divisor` entries, 0 = this sample's 2n).
// Shared between train_nbp and its gradient tests.
nn::Tape::Var nbp_unrolled_loss(nn::Tape& tape, nn::TapeBinding& bind,
                                const TannerGraph& graph, const NbpModel& model,
                                const BinVector& s, double prior_llr,
                                const BinVector& error, double llr_clamp,
                                double divisor = 0.0);

// Checkpoint wrappers (nn-engine format).
void save_nbp_model(const NbpModel& model, const std::string& path,
                    const nlohmann::json& metadata);
NbpModel load_nbp_model(const std::string& path);

}  // namespace qldpc
