#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

// Check-node tanh-product update shared by the plain and neural BP engines
// so both produce bit-identical messages for identical inputs.

namespace qldpc::detail {

inline double clamp_llr(double x, double c) { return std::clamp(x, -c, c); }

inline void check_update_into(std::span<const double> in, bool s_c,
                              double llr_clamp, std::span<double> out,
                              std::vector<double>& prefix,
                              std::vector<double>& suffix) {
  const std::size_t d = in.size();
  const double sign = s_c ? -1.0 : 1.0;
  if (d == 1) {
    out[0] = sign * llr_clamp;  // empty product = +1 pins the variable
    return;
  }
  prefix.resize(d + 1);
  suffix.resize(d + 1);
  prefix[0] = 1.0;
  for (std::size_t i = 0; i < d; ++i) prefix[i + 1] = prefix[i] * std::tanh(in[i] / 2.0);
  suffix[d] = 1.0;
  for (std::size_t i = d; i-- > 0;) suffix[i] = std::tanh(in[i] / 2.0) * suffix[i + 1];
  for (std::size_t i = 0; i < d; ++i)
    out[i] = clamp_llr(sign * 2.0 * std::atanh(prefix[i] * suffix[i + 1]), llr_clamp);
}

}  // namespace qldpc::detail
