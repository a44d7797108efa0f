#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "fieldtrace/featstore.hpp"

namespace fieldtrace {

inline constexpr double kDefaultCettEpsilon = 1e-12;

/// |a| * ||W_down[:, n]||_2 / ||y||_2 for one neuron. Returns nullopt when
/// the FFN output norm is <= eps (the caller skips and counts it).
std::optional<double> cett(double activation, double down_col_norm, double ffn_out_norm,
                           double eps = kDefaultCettEpsilon);

/// Inputs for one layer at one token.
struct LayerCettInputs {
  std::span<const float> activations;     // post-activation, pre-projection
  std::span<const float> down_col_norms;  // per neuron, input independent
  double ffn_out_norm = 0.0;
};

struct CettCounters {
  std::size_t degenerate_layers = 0;
};

/// Flattened per-token CETT vector over all layers; coordinates below
/// `floor` are dropped. Degenerate layers contribute nothing and are counted.
SparseVector cett_token_vector(std::span<const LayerCettInputs> layers, std::uint32_t dim_per_layer,
                               double floor = 0.0, double eps = kDefaultCettEpsilon,
                               CettCounters* counters = nullptr);

/// Element-wise mean over the tokens of a field span (implicit zeros);
/// support is the union of the inputs. Throws Error(EmptySpan).
SparseVector pool_field_cett(std::span<const SparseVector> per_token);

}  // namespace fieldtrace
