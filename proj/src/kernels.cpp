#include "cgd/kernels.hpp"

#include <algorithm>

namespace cgd {

Index MlpSpec::num_params() const {
  Index total = 0;
  for (Index l = 0; l < num_layers(); ++l) total += layer_dims[l + 1] * (layer_dims[l] + 1);
  return total;
}

Index MlpSpec::weight_offset(Index layer) const {
  Index off = 0;
  for (Index l = 0; l < layer; ++l) off += layer_dims[l + 1] * (layer_dims[l] + 1);
  return off;
}

Index MlpSpec::bias_offset(Index layer) const {
  return weight_offset(layer) + layer_dims[layer + 1] * layer_dims[layer];
}

void MlpSpec::validate() const {
  if (layer_dims.size() < 3) throw ContractError("MlpSpec: need at least one hidden layer");
  for (Index d : layer_dims)
    if (d < 1) throw ContractError("MlpSpec: layer widths must be positive");
}

namespace kernels {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;

void check_input(const MlpSpec& spec, const Matrix& input) {
  spec.validate();
  if (input.rows() != spec.input_dim()) throw ContractError("mlp: input width mismatch");
  if (input.cols() < 1) throw ContractError("mlp: empty batch");
}

// --- per-sample reference ---------------------------------------------------

Matrix forward_serial(const MlpSpec& spec, const double* params, const Matrix& input,
                      ForwardCache* cache) {
  const Index L = spec.num_layers();
  const Index B = input.cols();
  std::vector<Matrix> acts(L + 1);
  acts[0] = input;
  for (Index l = 0; l < L; ++l) {
    const Index in = spec.layer_dims[l], out = spec.layer_dims[l + 1];
    const double* W = params + spec.weight_offset(l);
    const double* b = params + spec.bias_offset(l);
    const bool relu = l + 1 < L;
    acts[l + 1].resize(out, B);
    for (Index s = 0; s < B; ++s) {
      for (Index i = 0; i < out; ++i) {
        double z = b[i];
        for (Index j = 0; j < in; ++j) z += W[i + j * out] * acts[l](j, s);
        acts[l + 1](i, s) = relu && z <= 0.0 ? 0.0 : z;
      }
    }
  }
  Matrix out = acts[L];
  if (cache) cache->activations = std::move(acts);
  return out;
}

void backward_serial(const MlpSpec& spec, const double* params, const ForwardCache& cache,
                     const Matrix& grad_output, double* grad_params, Matrix* grad_input) {
  const Index L = spec.num_layers();
  const Index B = grad_output.cols();
  if (grad_input) grad_input->resize(spec.input_dim(), B);
  for (Index s = 0; s < B; ++s) {
    Vector delta = grad_output.col(s);
    for (Index l = L - 1; l >= 0; --l) {
      const Index in = spec.layer_dims[l], out = spec.layer_dims[l + 1];
      const double* W = params + spec.weight_offset(l);
      if (l + 1 < L) {
        for (Index i = 0; i < out; ++i)
          if (cache.activations[l + 1](i, s) <= 0.0) delta[i] = 0.0;
      }
      if (grad_params) {
        double* gW = grad_params + spec.weight_offset(l);
        double* gb = grad_params + spec.bias_offset(l);
        for (Index j = 0; j < in; ++j)
          for (Index i = 0; i < out; ++i) gW[i + j * out] += delta[i] * cache.activations[l](j, s);
        for (Index i = 0; i < out; ++i) gb[i] += delta[i];
      }
      if (l == 0 && !grad_input) break;
      Vector prev = Vector::Zero(in);
      for (Index j = 0; j < in; ++j)
        for (Index i = 0; i < out; ++i) prev[j] += W[i + j * out] * delta[i];
      delta = std::move(prev);
    }
    if (grad_input) grad_input->col(s) = delta;
  }
}

// --- chunked OpenMP -----------------------------------------------------------

Matrix forward_omp(const MlpSpec& spec, const double* params, const Matrix& input,
                   ForwardCache* cache) {
  const Index L = spec.num_layers();
  const Index B = input.cols();
  std::vector<Matrix> acts(L + 1);
  acts[0] = input;
  for (Index l = 0; l < L; ++l) acts[l + 1].resize(spec.layer_dims[l + 1], B);
  const Index chunks = (B + kChunk - 1) / kChunk;

#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index c0 = c * kChunk, cn = std::min(kChunk, B - c0);
    for (Index l = 0; l < L; ++l) {
      const Index in = spec.layer_dims[l], out = spec.layer_dims[l + 1];
      ConstMap W(params + spec.weight_offset(l), out, in);
      ConstVecMap b(params + spec.bias_offset(l), out);
      auto z = acts[l + 1].middleCols(c0, cn);
      z.noalias() = W * acts[l].middleCols(c0, cn);
      z.colwise() += b;
      if (l + 1 < L) z = z.cwiseMax(0.0);
    }
  }
  Matrix out = acts[L];
  if (cache) cache->activations = std::move(acts);
  return out;
}

void backward_omp(const MlpSpec& spec, const double* params, const ForwardCache& cache,
                  const Matrix& grad_output, double* grad_params, Matrix* grad_input) {
  const Index L = spec.num_layers();
  const Index B = grad_output.cols();
  const Index P = spec.num_params();
  const Index chunks = (B + kChunk - 1) / kChunk;
  if (grad_input) grad_input->resize(spec.input_dim(), B);
  Matrix partial = grad_params ? Matrix::Zero(P, chunks) : Matrix();

#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index c0 = c * kChunk, cn = std::min(kChunk, B - c0);
    Matrix delta = grad_output.middleCols(c0, cn);
    for (Index l = L - 1; l >= 0; --l) {
      const Index in = spec.layer_dims[l], out = spec.layer_dims[l + 1];
      ConstMap W(params + spec.weight_offset(l), out, in);
      if (l + 1 < L) {
        delta = (cache.activations[l + 1].middleCols(c0, cn).array() > 0.0)
                    .select(delta, 0.0);
      }
      if (grad_params) {
        Eigen::Map<Matrix> gW(partial.col(c).data() + spec.weight_offset(l), out, in);
        Eigen::Map<Vector> gb(partial.col(c).data() + spec.bias_offset(l), out);
        gW.noalias() = delta * cache.activations[l].middleCols(c0, cn).transpose();
        gb = delta.rowwise().sum();
      }
      if (l == 0 && !grad_input) break;
      Matrix prev = W.transpose() * delta;
      delta = std::move(prev);
    }
    if (grad_input) grad_input->middleCols(c0, cn) = delta;
  }
  if (grad_params) {
    Eigen::Map<Vector> g(grad_params, P);
    for (Index c = 0; c < chunks; ++c) g += partial.col(c);
  }
}

}  // namespace

Matrix forward(const MlpSpec& spec, const double* params, const Matrix& input,
               ForwardCache* cache, Backend backend) {
  check_input(spec, input);
  return backend == Backend::Serial ? forward_serial(spec, params, input, cache)
                                    : forward_omp(spec, params, input, cache);
}

void backward(const MlpSpec& spec, const double* params, const ForwardCache& cache,
              const Matrix& grad_output, double* grad_params, Matrix* grad_input,
              Backend backend) {
  spec.validate();
  if (static_cast<Index>(cache.activations.size()) != spec.num_layers() + 1)
    throw ContractError("mlp backward: cache does not match spec");
  if (grad_output.rows() != spec.output_dim() ||
      grad_output.cols() != cache.activations[0].cols())
    throw ContractError("mlp backward: grad_output shape mismatch");
  if (backend == Backend::Serial) {
    backward_serial(spec, params, cache, grad_output, grad_params, grad_input);
  } else {
    backward_omp(spec, params, cache, grad_output, grad_params, grad_input);
  }
}

}  // namespace kernels
}  // namespace cgd
