#pragma once

#include "fdreg/rng.hpp"
#include "fdreg/tensor.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace fdreg {

// ---- Layer descriptions -----------------------------------------------------

struct DenseSpec {
    std::size_t in_features = 0, out_features = 0;
};
struct Conv1dSpec {
    std::size_t in_channels = 0, out_channels = 0, kernel_size = 0;
    std::size_t stride = 1, padding = 0;
};
struct BatchNormSpec {
    std::size_t channels = 0;
    double momentum = 0.1;
    double epsilon = 1e-5;
};
struct ReluSpec {};
struct MaxPoolSpec {
    std::size_t window = 2;
};
struct DropoutSpec {
    double rate = 0.0;  // in [0, 1)
};
struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, Conv1dSpec, BatchNormSpec, ReluSpec,
                               MaxPoolSpec, DropoutSpec, FlattenSpec>;

// Short stable kind tag, used for persistence and error messages.
std::string layer_kind(const LayerSpec& layer);

struct ModelSpec {
    std::vector<LayerSpec> layers;
    std::size_t input_dim = 0;   // d1
    std::size_t output_dim = 0;  // d2
};

// Per-sample activation shape, without the batch dimension: {features} for
// flat activations, {channels, length} for 1-D feature maps.
using ActShape = std::vector<std::size_t>;

// Walks the layer list and returns each layer's output shape. Throws
// std::invalid_argument when consecutive shapes do not compose or the final
// shape is not {output_dim}. A 2-D activation entering a single-input-channel
// conv is implicitly viewed as one channel.
std::vector<ActShape> infer_shapes(const ModelSpec& spec);

// ---- Parameters and caches --------------------------------------------------

// One slot per layer; only the tensors the layer kind uses are non-empty.
struct LayerParams {
    Tensor weight;    // dense: (out, in); conv1d: (out_ch, in_ch, k)
    Tensor bias;      // dense: (out); conv1d: (out_ch)
    Tensor scale;     // batchnorm: (channels), multiplicative
    Tensor shift;     // batchnorm: (channels), additive
    Tensor run_mean;  // batchnorm running statistics (not learnable)
    Tensor run_var;
};

struct ParameterSet {
    std::vector<LayerParams> layers;
};

// Deterministic initialization: dense/conv weights uniform in
// +-sqrt(6 / (fan_in + fan_out)), biases zero, batchnorm scale 1 / shift 0,
// running mean 0 / variance 1. Draws are consumed in layer order, row-major.
ParameterSet init_params(const ModelSpec& spec, Rng& rng);

// Gradient container with the same shape as the learnables (zero elsewhere).
ParameterSet zero_like(const ParameterSet& params);

// Stable enumeration of learnable tensors ("layer3.weight", ...), in layer
// order. Running statistics are excluded. Used by optimizers, penalties, and
// the gradient checks.
struct NamedTensorRef {
    std::string name;
    Tensor* tensor;
};
std::vector<NamedTensorRef> learnable_tensors(const ModelSpec& spec, ParameterSet& params);

// Weight matrices / conv kernels only (penalties exclude biases and batchnorm).
std::vector<NamedTensorRef> weight_tensors(const ModelSpec& spec, ParameterSet& params);

struct LayerCache {
    Tensor input;                    // layer input as seen in forward
    Tensor mask;                     // dropout keep-mask (already 1/(1-p) scaled)
    std::vector<std::size_t> argmax; // maxpool winning input positions
    Tensor xhat;                     // batchnorm normalized activations
    Tensor batch_mean, batch_var;    // batchnorm batch statistics
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    bool valid = false;
};

enum class Mode { train, eval };

// Runs the pipeline on a (batch x input_dim) tensor and returns
// (batch x output_dim) predictions.
//   - train mode: batchnorm uses batch statistics and updates the running ones
//     in `params`; dropout samples inverted-scaled masks from `rng` (required
//     whenever a dropout layer is present); `cache`, if given, is filled for
//     exactly one backward call.
//   - eval mode: running statistics, identity dropout, no rng, no cache.
// Throws std::invalid_argument on shape mismatch and std::runtime_error (a
// numeric error) on non-finite input.
Tensor forward(const ModelSpec& spec, ParameterSet& params, const Tensor& batch,
               Mode mode, Rng* rng = nullptr, ForwardCache* cache = nullptr);

// Backpropagates an upstream (batch x output_dim) gradient through the cached
// forward pass and returns gradients for every learnable tensor. The cache is
// consumed (one backward per forward).
ParameterSet backward(const ModelSpec& spec, const ParameterSet& params,
                      ForwardCache& cache, const Tensor& upstream);

// ---- Builders ----------------------------------------------------------------

// The reference 1-D CNN: three blocks of
//   conv1d(k=5, stride=1, padding=2) -> batchnorm -> relu -> maxpool(2)
// with channels 1 -> 32 -> 16 -> 8, then flatten and a single dense map to d2.
// Requires d1 >= 8 so the spatial path survives three halvings.
ModelSpec build_paper_cnn(std::size_t d1, std::size_t d2);

// Dense/relu stack with a linear final layer; widths = {in, hidden..., out}.
ModelSpec build_mlp(const std::vector<std::size_t>& widths);

// ---- Penalties ----------------------------------------------------------------

enum class PenaltyKind { L1, L2 };

// penalty = strength * sum(|w|) or strength * sum(w^2) over weight tensors
// only. When `grad_accum` is given, the penalty gradient is added into it
// (L1 uses subgradient 0 at exactly 0).
double param_penalty(const ModelSpec& spec, ParameterSet& params, PenaltyKind kind,
                     double strength, ParameterSet* grad_accum = nullptr);

}  // namespace fdreg
