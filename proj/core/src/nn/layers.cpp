#include "qldpc/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace qldpc::nn {

Tape::Var TapeBinding::operator[](const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Tape::Var v = tape_->input(store_->value(name));
  bound_.emplace(name, v);
  return v;
}

void TapeBinding::accumulate_grads() {
  for (const auto& [name, var] : bound_) {
    store_->accumulate_grad(name, tape_->grad(var));
  }
}

void make_mlp2(ParameterStore& store, const std::string& prefix, std::size_t in,
               std::size_t hidden, std::size_t out, Rng& rng) {
  store.create_uniform(prefix + ".w1", in, hidden, rng);
  store.create(prefix + ".b1", 1, hidden);
  store.create_uniform(prefix + ".w2", hidden, out, rng);
  store.create(prefix + ".b2", 1, out);
}

void make_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
              std::size_t hidden, Rng& rng) {
  store.create_uniform(prefix + ".wr", in + hidden, hidden, rng);
  store.create(prefix + ".br", 1, hidden);
  store.create_uniform(prefix + ".wz", in + hidden, hidden, rng);
  store.create(prefix + ".bz", 1, hidden);
  store.create_uniform(prefix + ".wh", in + hidden, hidden, rng);
  store.create(prefix + ".bh", 1, hidden);
}

void make_attention(ParameterStore& store, const std::string& prefix,
                    std::size_t dest_dim, std::size_t msg_dim, Rng& rng) {
  store.create_uniform(prefix + ".wq", dest_dim, msg_dim, rng);
  store.create_uniform(prefix + ".wk", msg_dim, msg_dim, rng);
  store.create_uniform(prefix + ".wv", msg_dim, msg_dim, rng);
}

Mlp2Params bind_mlp2(TapeBinding& bind, const std::string& prefix) {
  return Mlp2Params{bind[prefix + ".w1"], bind[prefix + ".b1"],
                    bind[prefix + ".w2"], bind[prefix + ".b2"]};
}

GruParams bind_gru(TapeBinding& bind, const std::string& prefix) {
  return GruParams{bind[prefix + ".wr"], bind[prefix + ".br"],
                   bind[prefix + ".wz"], bind[prefix + ".bz"],
                   bind[prefix + ".wh"], bind[prefix + ".bh"]};
}

AttnParams bind_attention(TapeBinding& bind, const std::string& prefix) {
  return AttnParams{bind[prefix + ".wq"], bind[prefix + ".wk"], bind[prefix + ".wv"]};
}

Tape::Var mlp2(Tape& t, const Mlp2Params& p, Tape::Var x) {
  Tape::Var h = t.relu(t.add_rowvec(t.matmul(x, p.w1), p.b1));
  return t.add_rowvec(t.matmul(h, p.w2), p.b2);
}

Tape::Var gru_cell(Tape& t, const GruParams& p, Tape::Var x, Tape::Var h) {
  Tape::Var xh = t.concat_cols(x, h);
  Tape::Var r = t.sigmoid(t.add_rowvec(t.matmul(xh, p.wr), p.br));
  Tape::Var z = t.sigmoid(t.add_rowvec(t.matmul(xh, p.wz), p.bz));
  Tape::Var xrh = t.concat_cols(x, t.mul(r, h));
  Tape::Var hc = t.tanh_op(t.add_rowvec(t.matmul(xrh, p.wh), p.bh));
  return t.add(t.mul(t.affine(z, -1.0, 1.0), h), t.mul(z, hc));
}

Tape::Var attention_aggregate(Tape& t, const AttnParams& p, Tape::Var dest,
                              Tape::Var messages,
                              const std::vector<std::size_t>& seg,
                              std::size_t groups) {
  std::size_t u = t.value(p.wk).cols;
  Tape::Var q = t.matmul(dest, p.wq);
  Tape::Var k = t.matmul(messages, p.wk);
  Tape::Var v = t.matmul(messages, p.wv);
  Tape::Var qg = t.gather_rows(q, seg);
  Tape::Var scores = t.scale(t.row_dot(qg, k), 1.0 / std::sqrt((double)u));
  Tape::Var alpha = t.segment_softmax(scores, seg, groups);
  return t.segment_sum(t.mul_colvec(v, alpha), seg, groups);
}

Tape::Var bce_loss(Tape& t, Tape::Var predictions, Tape::Var labels, double eps,
                   double divisor) {
  const Tensor& yp = t.value(predictions);
  const Tensor& yl = t.value(labels);
  if (!yp.same_shape(yl)) {
    throw std::invalid_argument("nn: bce_loss shape mismatch (" + yp.shape_str() +
                                " vs " + yl.shape_str() + ")");
  }
  if (yp.size() == 0) throw std::invalid_argument("nn: bce_loss on empty tensors");
  double den = divisor > 0.0 ? divisor : (double)yp.size();
  Tape::Var yc = t.clamp(predictions, eps, 1.0 - eps);
  Tape::Var pos = t.mul(labels, t.log_op(yc));
  Tape::Var neg = t.mul(t.affine(labels, -1.0, 1.0), t.log_op(t.affine(yc, -1.0, 1.0)));
  return t.scale(t.sum(t.add(pos, neg)), -1.0 / den);
}

}  // namespace qldpc::nn
