#pragma once
#include <functional>

#include "cornet/trainer.hpp"

namespace cornet {

using CateFn = std::function<double(std::span<const double>)>;

/// Shared representation with one linear head per potential outcome
/// (TarNet-style). CATE prediction is phi(x) . (heads[1] - heads[0]).
struct TwoHeadModel {
    LayerStack phi;
    std::array<Vec, 2> heads;
    bool augment_input = true;

    double predict_cate(std::span<const double> x) const;
    double predict_outcome(std::span<const double> x, int arm) const;
};

struct BaselineConfig {
    NetArch arch;
    TrainControls train;
};

/// Randomized-only estimator: empirical risk minimization on the randomized data.
TwoHeadModel fit_tau_unc(const TreatmentDataset& rand, const BaselineConfig& cfg, Rng& rng);

/// Observational-only estimator: step 1 of the two-step procedure with
/// lambda_d = 0, and no debiasing step.
TwoHeadModel fit_tau_conf(const TreatmentDataset& obs, const BaselineConfig& cfg, Rng& rng);

/// Pointwise (1 - lam) tau_unc + lam tau_conf.
CateFn make_tau_avg(const TwoHeadModel& m_unc, const TwoHeadModel& m_conf, double lam);

struct WeightedFit {
    TwoHeadModel model;
    TrainLog log;
};

/// Weighted risk over the pooled data with randomized terms scaled by Lambda
/// and normalizer Lambda * n_unc + n_conf.
WeightedFit fit_tau_weight(const CombinedData& data, double lambda_cap, const BaselineConfig& cfg, Rng& rng);

/// The tau_weight training criterion evaluated at a fixed model (used by the
/// endpoint identity checks).
double weighted_objective(const TwoHeadModel& model, const CombinedData& data, double lambda_cap);

// ---- two-step bias-removal baselines ------------------------------------

enum class KallusBase { ridge, nn };
enum class KallusTarget { cate, outcome };

struct PropensitySpec {
    bool known = true;  // false: logistic regression on the randomized data
    double e = 0.5;
};

struct KallusConfig {
    BaselineConfig base_cfg;
    double ridge_scale = 1e-2;  // ridge penalty = scale * trace(Z^T Z) / p
    double clip_lo = 0.01;      // propensity clipping bounds
    double clip_hi = 0.99;
};

/// Confounded base model plus a linear correction learned from randomized
/// data. cate-target corrects the CATE via the signed re-weighting
/// q(x) = t/e(x) - (1-t)/(1-e(x)); outcome-target corrects each potential
/// outcome separately, without re-weighting.
struct KallusModel {
    KallusBase base = KallusBase::ridge;
    KallusTarget target = KallusTarget::cate;
    std::array<Vec, 2> ridge_coef;  // per-arm coefficients on [x, 1] (ridge base)
    TwoHeadModel nn;                // nn base
    Vec theta;                      // cate-target correction
    std::array<Vec, 2> theta_arm;   // outcome-target corrections
    std::vector<std::string> notes;

    double base_outcome(std::span<const double> x, int arm) const;
    double base_cate(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
};

KallusModel fit_kallus(const CombinedData& data, KallusBase base, KallusTarget target,
                       const PropensitySpec& propensity, const KallusConfig& cfg, Rng& rng);

/// Closed-form ridge: (Z^T Z + lam I) beta = Z^T y.
Vec ridge_fit(const Matrix& z, const Vec& y, double lam);

/// Logistic regression by damped Newton to gradient-norm < tol.
Vec logistic_fit(const Matrix& z, const std::vector<int>& labels, int max_iter = 200, double tol = 1e-6);

}  // namespace cornet
