#include "fieldtrace/cett.hpp"

#include <cmath>
#include <map>

#include "fieldtrace/error.hpp"

namespace fieldtrace {

std::optional<double> cett(double activation, double down_col_norm, double ffn_out_norm,
                           double eps) {
  if (down_col_norm < 0.0) throw Error(Errc::InvalidArgument, "column norm must be non-negative");
  if (!(ffn_out_norm > eps)) return std::nullopt;
  return std::abs(activation) * down_col_norm / ffn_out_norm;
}

SparseVector cett_token_vector(std::span<const LayerCettInputs> layers, std::uint32_t dim_per_layer,
                               double floor, double eps, CettCounters* counters) {
  SparseVector out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& in = layers[l];
    if (in.activations.size() != dim_per_layer || in.down_col_norms.size() != dim_per_layer)
      throw Error(Errc::InvalidArgument, "layer " + std::to_string(l) + " input size mismatch");
    if (!(in.ffn_out_norm > eps)) {
      if (counters) ++counters->degenerate_layers;
      continue;
    }
    const auto base = static_cast<std::uint32_t>(l) * dim_per_layer;
    for (std::uint32_t n = 0; n < dim_per_layer; ++n) {
      auto v = cett(in.activations[n], in.down_col_norms[n], in.ffn_out_norm, eps);
      if (v && *v > 0.0 && *v >= floor) {
        out.index.push_back(base + n);
        out.value.push_back(static_cast<float>(*v));
      }
    }
  }
  return out;
}

SparseVector pool_field_cett(std::span<const SparseVector> per_token) {
  if (per_token.empty()) throw Error(Errc::EmptySpan, "no tokens in field span");
  std::map<std::uint32_t, double> sum;
  for (const auto& v : per_token)
    for (std::size_t i = 0; i < v.nnz(); ++i) sum[v.index[i]] += v.value[i];
  const double k = static_cast<double>(per_token.size());
  SparseVector out;
  out.index.reserve(sum.size());
  out.value.reserve(sum.size());
  for (const auto& [idx, s] : sum) {
    out.index.push_back(idx);
    out.value.push_back(static_cast<float>(s / k));
  }
  return out;
}

}  // namespace fieldtrace
