#pragma once

// Desk-scale reference network: a stack of dense layers with a
// softmax-cross-entropy head, plus tape-based gradient capture. The backward
// pass stores only each layer's input activations and output gradients; the
// weight gradients are reconstructed afterwards from the tape as
//
//   dL/dW = (dL/dz)^T a
//
// so no weight gradient is materialized during backpropagation. Loss is the
// mean over the batch.

#include "qtcq/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace qtcq {

enum class Activation { None, ReLU };

struct DenseLayer {
    Matrix weights; // out_dim x in_dim; rows are channels
    Vector bias;    // out_dim
    Activation activation = Activation::ReLU;
};

struct TinyNet {
    std::vector<DenseLayer> layers;

    Index input_dim() const { return layers.front().weights.cols(); }
    Index num_classes() const { return layers.back().weights.rows(); }
    void validate() const;
};

struct Batch {
    Matrix features;          // samples x input_dim
    std::vector<int> targets; // class indices, one per sample
};

struct LayerTape {
    Matrix inputs;       // samples x in_dim, the layer's input activations
    Matrix output_grads; // samples x out_dim, dL/dz (empty until backward)
};
using NetTape = std::vector<LayerTape>;

struct ForwardResult {
    double loss = 0.0;
    NetTape tape; // input activations only
};

ForwardResult forward(const TinyNet& net, const Batch& batch);

// Forward + backward; caches dL/dz per layer without forming weight grads.
NetTape backward_taped(const TinyNet& net, const Batch& batch);

std::vector<Matrix> weight_grads_from_tape(const NetTape& tape);

// Central difference d loss / d W[layer](i, j); the oracle for the tape path.
double finite_diff_grad(const TinyNet& net, const Batch& batch, int layer, Index i, Index j,
                        double eps);
double central_difference(const std::function<double(double)>& f, double x, double eps);

// --- reproducible synthetic instances --------------------------------------

// Linear-teacher dataset: gaussian features, labels = argmax of a random
// teacher's logits, then a fraction of labels resampled uniformly.
Batch make_synthetic_batch(std::uint64_t seed, Index samples, Index in_dim, Index classes,
                           double label_noise = 0.05);

// Gaussian weights scaled by 1/sqrt(fan_in); a few entries are inflated to
// give each matrix a heavy tail. dims = {in, hidden..., classes}, ReLU
// between layers, linear head.
TinyNet make_random_net(std::uint64_t seed, const std::vector<Index>& dims = {16, 32, 32, 8});

} // namespace qtcq
