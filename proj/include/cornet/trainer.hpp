#pragma once
#include <array>
#include <string>

#include "cornet/dataset.hpp"
#include "cornet/net.hpp"

namespace cornet {

/// Network shapes shared by the representation learners. The representation
/// input is the covariate vector with a constant-1 feature appended, so the
/// first layer supplies the only affine offset in the stack.
struct NetArch {
    std::vector<std::size_t> phi_hidden = {32, 32};
    std::size_t d_phi = 8;
    std::vector<std::size_t> adversary_hidden = {16};
};

struct TrainControls {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch = 256;             // minibatch size above the full-batch limit
    std::size_t full_batch_limit = 2048; // at or below this, train full-batch
    std::size_t epochs = 0;              // 0: derive from target_steps
    std::size_t target_steps = 4000;
    double divergence_limit = 1e6;
};

struct TrainLog {
    Vec objective;    // per epoch: squared loss (+ lambda_d * discrepancy when balancing)
    Vec reg_loss;     // per epoch squared-loss component
    Vec discrepancy;  // per epoch hard-error divergence estimate; empty when lambda_d == 0
    double effective_lambda = 1.0;  // n_conf / (Lambda n_unc + n_conf) bookkeeping
    double max_weight_norm = 0.0;   // max ||W||_{1,inf} over representation layers after fit
    std::vector<std::string> notes;
};

/// Representation + per-arm linear heads (+ adversary when balancing was on).
struct RepresentationFit {
    LayerStack phi;            // input dim = d + 1 (constant feature)
    std::array<Vec, 2> heads;  // indexed by arm
    LayerStack adversary;
    bool adversary_trained = false;
    TrainLog log;
};

/// One weighted regression task. weights empty means all ones;
/// weight_normalizer <= 0 means "sum of weights". When lambda_d > 0,
/// balance_x supplies the randomized covariates that seed the mixup
/// interpolations and an adversary with a gradient-reversal layer pushes the
/// representation distributions together.
struct TrainTask {
    const Matrix* x = nullptr;
    const std::vector<int>* t = nullptr;
    const Vec* y = nullptr;
    Vec weights;
    double weight_normalizer = 0.0;
    const Matrix* balance_x = nullptr;
    double lambda_d = 0.0;
    double mixup_alpha = 0.2;
    std::size_t mixup_m = 0;  // 0: one interpolation per main row
};

RepresentationFit train_representation(const TrainTask& task, const NetArch& arch, const TrainControls& ctl,
                                       Rng& rng);

inline Vec augmented_input(std::span<const double> x) {
    Vec v(x.begin(), x.end());
    v.push_back(1.0);
    return v;
}

Matrix augmented_matrix(const Matrix& x);

/// phi(x) with the constant feature appended when the model was trained that way.
Vec representation_of(const LayerStack& phi, bool augment, std::span<const double> x);

}  // namespace cornet
