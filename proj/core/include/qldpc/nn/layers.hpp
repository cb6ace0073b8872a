#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qldpc/nn/params.hpp"
#include "qldpc/nn/tape.hpp"

namespace qldpc::nn {

// Binds store parameters onto a tape on first use and remembers the
// mapping so gradients can be pushed back after backward().
class TapeBinding {
 public:
  TapeBinding(Tape& tape, ParameterStore& store) : tape_(&tape), store_(&store) {}

  Tape::Var operator[](const std::string& name);

  // store.accumulate_grad for every bound parameter; call after backward().
  void accumulate_grads();

  const std::map<std::string, Tape::Var>& bound() const { return bound_; }

 private:
  Tape* tape_;
  ParameterStore* store_;
  std::map<std::string, Tape::Var> bound_;
};

struct Mlp2Params {
  Tape::Var w1, b1, w2, b2;
};

struct GruParams {
  Tape::Var wr, br, wz, bz, wh, bh;
};

struct AttnParams {
  Tape::Var wq, wk, wv;
};

// Parameter registration. Weights get the uniform fan init, biases zeros.
void make_mlp2(ParameterStore& store, const std::string& prefix, std::size_t in,
               std::size_t hidden, std::size_t out, Rng& rng);
void make_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
              std::size_t hidden, Rng& rng);
void make_attention(ParameterStore& store, const std::string& prefix,
                    std::size_t dest_dim, std::size_t msg_dim, Rng& rng);

Mlp2Params bind_mlp2(TapeBinding& bind, const std::string& prefix);
GruParams bind_gru(TapeBinding& bind, const std::string& prefix);
AttnParams bind_attention(TapeBinding& bind, const std::string& prefix);

// Linear -> ReLU -> Linear; any final activation is the caller's business.
Tape::Var mlp2(Tape& t, const Mlp2Params& p, Tape::Var x);

// Standard GRU cell:
//   r = sigmoid([x; h] Wr + br)
//   z = sigmoid([x; h] Wz + bz)
//   hc = tanh([x; r (.) h] Wh + bh)
//   h' = (1 - z) (.) h + z (.) hc
Tape::Var gru_cell(Tape& t, const GruParams& p, Tape::Var x, Tape::Var h);

// Scaled dot-product attention with the destination embedding as query,
// vectorized over destinations: message row e aggregates into group seg[e]
// with weights softmax(<Wq dest, Wk m> / sqrt(u)); output rows are
// sum_e alpha_e (Wv m_e). Groups with no messages get zero rows.
Tape::Var attention_aggregate(Tape& t, const AttnParams& p, Tape::Var dest,
                              Tape::Var messages,
                              const std::vector<std::size_t>& seg,
                              std::size_t groups);

// Mean binary cross-entropy, predictions clamped to [eps, 1 - eps].
// divisor overrides the averaging denominator when one mini-batch is split
// across several tapes (0 means the label count of this tape).
Tape::Var bce_loss(Tape& t, Tape::Var predictions, Tape::Var labels,
                   double eps = 1e-7, double divisor = 0.0);

}  // namespace qldpc::nn
