#pragma once
#include <functional>

#include "cornet/dataset.hpp"
#include "cornet/net.hpp"

namespace cornet {

/// Mean squared difference between a CATE predictor and a per-row reference;
/// reports take its square root.
double pehe_hat(const std::function<double(std::span<const double>)>& predictor, const Matrix& x_test,
                std::span<const double> tau_ref);

struct HDivProbeConfig {
    double train_fraction = 0.7;
    std::size_t epochs = 200;
    std::vector<std::size_t> adversary_hidden = {16};
    double learning_rate = 1e-3;
    std::size_t batch = 256;
    std::size_t min_rows = 10;
};

/// Classifier-based two-sample divergence: trains a fresh adversary on a
/// train split of {phi(x_rand)} vs {phi(x_obs)}, scores the held-out split by
/// the hard 0/1 error-sum, and returns 2 (1 - min(error_sum, 1)). The min
/// encodes the constant-classifier fallback, so the estimate lies in [0, 2].
/// Pass phi = nullptr to probe the raw covariates.
double h_div_probe(const LayerStack* phi, bool augment, const Matrix& x_obs, const Matrix& x_rand,
                   const HDivProbeConfig& cfg, Rng& rng);

/// Smallest eigenvalue of the arm's representation sample covariance
/// (1/n_unc) phi(X_t)^T phi(X_t); a positive value certifies the
/// compatibility condition for the debiasing Lasso.
double min_eig_diagnostic(const LayerStack& phi, bool augment, const TreatmentDataset& rand, int arm);

struct DiagnosticsRecord {
    double h_div = 0.0;
    std::array<double, 2> min_eig_by_arm = {0.0, 0.0};
    double max_weight_norm = 0.0;
};

DiagnosticsRecord diagnose(const LayerStack& phi, bool augment, const CombinedData& data,
                           const HDivProbeConfig& cfg, Rng& rng);

}  // namespace cornet
