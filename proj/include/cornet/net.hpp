#pragma once
#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "cornet/matrix.hpp"
#include "cornet/rng.hpp"

namespace cornet {

enum class Activation { identity, sigmoid };

/// Feedforward network f_K(x) = W_K s(W_{K-1} s(... W_1 x)), hidden
/// activation tanh throughout, no per-layer bias vectors. Callers that want
/// affine capacity append a constant-1 feature to the input instead.
struct LayerStack {
    std::vector<std::size_t> layer_dims;  // input dim first, output dim last
    std::vector<Matrix> weights;          // weights[k] is (layer_dims[k+1] x layer_dims[k])
    Activation output_activation = Activation::identity;

    std::size_t depth() const { return weights.size(); }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }

    void validate() const;
    /// Max (1,inf) norm over layers, recorded as a training diagnostic.
    double max_weight_norm_1inf() const;
};

/// One gradient matrix per layer, shape-matching the owning stack.
struct GradientSet {
    std::vector<Matrix> g;

    static GradientSet zeros_like(const LayerStack& stack);
    void add_scaled(const GradientSet& other, double scale);
    bool all_finite() const;
};

/// Bias-corrected adaptive-moment optimizer state for one LayerStack.
struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    long step_count = 0;

    static OptimizerState init(const LayerStack& stack, double lr = 1e-3, double beta1 = 0.9,
                               double beta2 = 0.999, double eps = 1e-8);
};

/// Fresh stack with weights drawn uniformly in [-1/sqrt(in_k), +1/sqrt(in_k)].
LayerStack make_stack(const std::vector<std::size_t>& dims, Activation out_act, Rng& rng);

Vec forward(const LayerStack& stack, std::span<const double> x);

/// Gradient of upstream . forward(x) with respect to every weight matrix.
GradientSet backward(const LayerStack& stack, std::span<const double> x,
                     std::span<const double> upstream);

/// Gradient reverse layer: identity on the forward pass, -scale on gradients.
Vec reverse_gradient(std::span<const double> upstream, double scale);

void adam_step(OptimizerState& state, const GradientSet& grads, LayerStack& stack);

// ---- batched internals shared by the training code ---------------------

/// Batched forward pass keeping the per-layer activations needed by
/// backward_batch. acts[0] is the input batch; acts[k] (k = 1..K-1) holds the
/// post-tanh hidden activations; preact is the last layer before the output
/// activation.
struct ForwardCache {
    std::vector<Matrix> acts;
    Matrix preact;
};

ForwardCache forward_batch(const LayerStack& stack, const Matrix& x);
Matrix cache_outputs(const LayerStack& stack, const ForwardCache& cache);

/// Backward from gradients w.r.t. the last pre-activation (rows match the
/// batch). Grads are summed over the batch. When dx is non-null the gradient
/// w.r.t. the input batch is written there (used by the gradient-reversal
/// path into the representation).
GradientSet backward_batch(const LayerStack& stack, const ForwardCache& cache,
                           const Matrix& d_preact, Matrix* dx = nullptr);

// Low-level adaptive-moment update on one flat parameter block.
void adam_update_block(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                       std::vector<double>& v, long step_count, double lr, double beta1, double beta2,
                       double eps);

// ---- serialization (versioned text format) -----------------------------

void save_stack(std::ostream& os, const LayerStack& stack);
LayerStack load_stack(std::istream& is);

}  // namespace cornet
