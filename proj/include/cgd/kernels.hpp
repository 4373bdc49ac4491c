#pragma once

// Batched forward/backward passes of a dense ReLU network with a linear
// output layer. Two backends: a per-sample loop reference and a chunked
// OpenMP version. The chunk size is fixed, so the OpenMP backend gives the
// same bits for any thread count.

#include "cgd/core.hpp"

#include <vector>

namespace cgd {

/// Layer widths from input to output. Hidden layers use ReLU (subgradient 0
/// at 0), the last layer is linear.
struct MlpSpec {
  std::vector<Index> layer_dims;

  Index num_layers() const { return static_cast<Index>(layer_dims.size()) - 1; }
  Index input_dim() const { return layer_dims.front(); }
  Index output_dim() const { return layer_dims.back(); }
  /// Parameters are packed per layer as W (out x in, column-major) then b.
  Index num_params() const;
  Index weight_offset(Index layer) const;
  Index bias_offset(Index layer) const;
  void validate() const;
};

namespace kernels {

enum class Backend { Serial, OpenMP };

/// Samples per OpenMP work item.
inline constexpr Index kChunk = 16;

struct ForwardCache {
  /// activations[0] is the input, activations[l + 1] the output of layer l
  /// (post-ReLU for hidden layers). Each is width x batch.
  std::vector<Matrix> activations;
};

/// Output (out_dim x batch). Fills `cache` when non-null.
Matrix forward(const MlpSpec& spec, const double* params, const Matrix& input,
               ForwardCache* cache, Backend backend);

/// Reverse pass given d(loss)/d(output). Adds parameter gradients into
/// `grad_params` (length num_params) when non-null and writes d(loss)/d(input)
/// into `grad_input` when non-null.
void backward(const MlpSpec& spec, const double* params, const ForwardCache& cache,
              const Matrix& grad_output, double* grad_params, Matrix* grad_input,
              Backend backend);

}  // namespace kernels
}  // namespace cgd
