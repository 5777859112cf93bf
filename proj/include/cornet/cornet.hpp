#pragma once
#include <functional>
#include <optional>

#include "cornet/lasso.hpp"
#include "cornet/trainer.hpp"

namespace cornet {

/// Covariate interpolations between the randomized and observational
/// samples: row r is mu * x_unc[j] + (1 - mu) * x_conf[r mod n_conf] with
/// mu ~ Beta(alpha, alpha) per row and j uniform over the randomized rows.
Matrix mixup_augment(const Matrix& x_unc, const Matrix& x_conf, double alpha, std::size_t m, Rng& rng);

/// Test hook: same interpolation scheme with an injectable mu sampler, also
/// reporting which randomized row and mu each output row used.
struct MixupDraw {
    Matrix x;
    std::vector<std::size_t> unc_rows;
    Vec mu;
};
MixupDraw mixup_augment_detailed(const Matrix& x_unc, const Matrix& x_conf, std::size_t m,
                                 const std::function<double(Rng&)>& mu_sampler, Rng& rng);

struct Step1Config {
    std::optional<double> lambda_d;  // unset: the closed-form lambda_delta value
    double mixup_alpha = 0.2;
    std::size_t m = 0;  // interpolated-sample count; 0 = n_conf
    NetArch arch;
    TrainControls train;
};

struct Step2Config {
    std::optional<double> lambda_delta;  // unset: default_lambda_delta(d_phi, n_unc)
    double tol = 1e-8;
    int max_sweeps = 10000;
};

/// Fitted two-step estimator. The unconfounded head for arm t is
/// w_c[t] + delta[t]; predictions are phi(x) . (w_c[1]+delta[1]-w_c[0]-delta[0]).
struct CornetModel {
    LayerStack phi;
    std::array<Vec, 2> w_c;
    std::array<Vec, 2> delta;
    double lambda_d = 0.0;
    double lambda_delta = 0.0;
    bool augment_input = true;

    double predict(std::span<const double> x) const;
};

double predict_cate(const CornetModel& model, std::span<const double> x);

/// Closed-form regularization weight sqrt((1/d_phi) log(d_phi) / log(n_unc)),
/// natural logs.
double default_lambda_delta(std::size_t d_phi, std::size_t n_unc);

/// Step 1: balanced representation + confounded heads from observational
/// data. With lambda_d = 0 no adversary is built and the objective is plain
/// empirical risk.
RepresentationFit fit_step1(const CombinedData& data, const Step1Config& cfg, Rng& rng);

/// Step 2: per-arm sparse debiasing from randomized data. Each arm solves a
/// Lasso over the residuals y - phi(x) . w_c[t]; the per-arm penalty is
/// scaled by n_unc / n_arm so the pair matches the joint 1/n_unc objective.
std::array<Vec, 2> fit_step2(const LayerStack& phi, const std::array<Vec, 2>& w_c,
                             const TreatmentDataset& rand, const Step2Config& cfg, bool augment = true);

struct CornetFit {
    CornetModel model;
    TrainLog log;
};

CornetFit fit_cornet(const CombinedData& data, const Step1Config& s1, const Step2Config& s2, Rng& rng);

}  // namespace cornet
