#include "cornet/baselines.hpp"

#include <cmath>

#include "cornet/linalg.hpp"

namespace cornet {

double TwoHeadModel::predict_cate(std::span<const double> x) const {
    const Vec z = representation_of(phi, augment_input, x);
    return dot(z, heads[1]) - dot(z, heads[0]);
}

double TwoHeadModel::predict_outcome(std::span<const double> x, int arm) const {
    const Vec z = representation_of(phi, augment_input, x);
    return dot(z, heads[arm]);
}

static TwoHeadModel fit_plain_erm(const TreatmentDataset& ds, const BaselineConfig& cfg, Rng& rng) {
    ds.validate();
    TrainTask task;
    task.x = &ds.x;
    task.t = &ds.t;
    task.y = &ds.y;
    task.lambda_d = 0.0;
    RepresentationFit fit = train_representation(task, cfg.arch, cfg.train, rng);
    TwoHeadModel m;
    m.phi = std::move(fit.phi);
    m.heads = std::move(fit.heads);
    m.augment_input = true;
    return m;
}

TwoHeadModel fit_tau_unc(const TreatmentDataset& rand, const BaselineConfig& cfg, Rng& rng) {
    return fit_plain_erm(rand, cfg, rng);
}

TwoHeadModel fit_tau_conf(const TreatmentDataset& obs, const BaselineConfig& cfg, Rng& rng) {
    return fit_plain_erm(obs, cfg, rng);
}

CateFn make_tau_avg(const TwoHeadModel& m_unc, const TwoHeadModel& m_conf, double lam) {
    if (!(lam >= 0.0 && lam <= 1.0)) throw config_error("tau_avg: lam must lie in [0, 1]");
    return [m_unc, m_conf, lam](std::span<const double> x) {
        return (1.0 - lam) * m_unc.predict_cate(x) + lam * m_conf.predict_cate(x);
    };
}

WeightedFit fit_tau_weight(const CombinedData& data, double lambda_cap, const BaselineConfig& cfg, Rng& rng) {
    data.validate();
    if (lambda_cap < 0.0) throw config_error("tau_weight: Lambda must be nonnegative");
    const std::size_t n_c = data.obs.n();
    const std::size_t n_u = data.rand.n();
    Matrix x(n_c + n_u, data.obs.dim());
    std::vector<int> t(n_c + n_u);
    Vec y(n_c + n_u);
    Vec w(n_c + n_u);
    for (std::size_t i = 0; i < n_c; ++i) {
        std::copy(data.obs.x.row(i).begin(), data.obs.x.row(i).end(), x.row(i).begin());
        t[i] = data.obs.t[i];
        y[i] = data.obs.y[i];
        w[i] = 1.0;
    }
    for (std::size_t i = 0; i < n_u; ++i) {
        std::copy(data.rand.x.row(i).begin(), data.rand.x.row(i).end(), x.row(n_c + i).begin());
        t[n_c + i] = data.rand.t[i];
        y[n_c + i] = data.rand.y[i];
        w[n_c + i] = lambda_cap;
    }
    TrainTask task;
    task.x = &x;
    task.t = &t;
    task.y = &y;
    task.weights = std::move(w);
    task.weight_normalizer = lambda_cap * static_cast<double>(n_u) + static_cast<double>(n_c);
    RepresentationFit fit = train_representation(task, cfg.arch, cfg.train, rng);
    WeightedFit out;
    out.model.phi = std::move(fit.phi);
    out.model.heads = std::move(fit.heads);
    out.log = std::move(fit.log);
    out.log.effective_lambda = static_cast<double>(n_c) / (lambda_cap * static_cast<double>(n_u) + static_cast<double>(n_c));
    return out;
}

double weighted_objective(const TwoHeadModel& model, const CombinedData& data, double lambda_cap) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.rand.n(); ++i) {
        const double e = model.predict_outcome(data.rand.x.row(i), data.rand.t[i]) - data.rand.y[i];
        acc += lambda_cap * e * e;
    }
    for (std::size_t i = 0; i < data.obs.n(); ++i) {
        const double e = model.predict_outcome(data.obs.x.row(i), data.obs.t[i]) - data.obs.y[i];
        acc += e * e;
    }
    return acc / (lambda_cap * static_cast<double>(data.rand.n()) + static_cast<double>(data.obs.n()));
}

Vec ridge_fit(const Matrix& z, const Vec& y, double lam) {
    if (lam < 0.0) throw config_error("ridge_fit: lam must be nonnegative");
    const std::size_t p = z.cols;
    Matrix gram(p, p);
    gemm_tn(z, z, gram);
    for (std::size_t j = 0; j < p; ++j) gram(j, j) += lam;
    Vec zty(p, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < p; ++j) zty[j] += z(i, j) * y[i];
    try {
        return solve_spd(gram, zty);
    } catch (const numeric_error&) {
        throw numeric_error("ridge system is singular; use lam > 0");
    }
}

Vec logistic_fit(const Matrix& z, const std::vector<int>& labels, int max_iter, double tol) {
    const std::size_t n = z.rows;
    const std::size_t p = z.cols;
    if (labels.size() != n) throw shape_error("logistic_fit: label count mismatch");
    Vec beta(p, 0.0);
    Vec eta(n), prob(n);
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            eta[i] = dot(z.row(i), beta);
            prob[i] = 1.0 / (1.0 + std::exp(-eta[i]));
        }
        Vec grad(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = static_cast<double>(labels[i]) - prob[i];
            for (std::size_t j = 0; j < p; ++j) grad[j] += r * z(i, j);
        }
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < tol) break;
        Matrix hess(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = prob[i] * (1.0 - prob[i]);
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b) hess(a, b) += s * z(i, a) * z(i, b);
        }
        for (std::size_t j = 0; j < p; ++j) hess(j, j) += 1e-10;  // guards the separable-data limit
        const Vec step = solve_spd(hess, grad);
        // damping: halve until the log-likelihood does not decrease
        auto loglik = [&](const Vec& b) {
            double ll = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = dot(z.row(i), b);
                ll += labels[i] ? -std::log1p(std::exp(-e)) : -std::log1p(std::exp(e));
            }
            return ll;
        };
        const double base_ll = loglik(beta);
        double scale = 1.0;
        Vec cand(p);
        for (int half = 0; half < 30; ++half) {
            for (std::size_t j = 0; j < p; ++j) cand[j] = beta[j] + scale * step[j];
            if (loglik(cand) >= base_ll) break;
            scale *= 0.5;
        }
        beta = cand;
    }
    return beta;
}

double KallusModel::base_outcome(std::span<const double> x, int arm) const {
    if (base == KallusBase::nn) return nn.predict_outcome(x, arm);
    const Vec xa = augmented_input(x);
    return dot(xa, ridge_coef[arm]);
}

double KallusModel::base_cate(std::span<const double> x) const {
    return base_outcome(x, 1) - base_outcome(x, 0);
}

double KallusModel::predict(std::span<const double> x) const {
    if (target == KallusTarget::cate) return base_cate(x) + dot(x, theta);
    const double f1 = base_outcome(x, 1) + dot(x, theta_arm[1]);
    const double f0 = base_outcome(x, 0) + dot(x, theta_arm[0]);
    return f1 - f0;
}

KallusModel fit_kallus(const CombinedData& data, KallusBase base, KallusTarget target,
                       const PropensitySpec& propensity, const KallusConfig& cfg, Rng& rng) {
    data.validate();
    KallusModel model;
    model.base = base;
    model.target = target;

    // biased base model from observational data
    if (base == KallusBase::nn) {
        model.nn = fit_tau_conf(data.obs, cfg.base_cfg, rng);
    } else {
        const Matrix xa = augmented_matrix(data.obs.x);
        for (int arm : {0, 1}) {
            const auto rows = data.obs.arm_rows(arm);
            if (rows.empty()) throw fit_error("observational data has no samples in arm " + std::to_string(arm));
            Matrix z(rows.size(), xa.cols);
            Vec y(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                std::copy(xa.row(rows[k]).begin(), xa.row(rows[k]).end(), z.row(k).begin());
                y[k] = data.obs.y[rows[k]];
            }
            Matrix gram(xa.cols, xa.cols);
            gemm_tn(z, z, gram);
            double trace = 0.0;
            for (std::size_t j = 0; j < xa.cols; ++j) trace += gram(j, j);
            const double lam = cfg.ridge_scale * trace / static_cast<double>(xa.cols);
            model.ridge_coef[arm] = ridge_fit(z, y, lam);
        }
    }

    // propensities on the randomized data
    const TreatmentDataset& rct = data.rand;
    Vec e(rct.n(), propensity.e);
    if (propensity.known) {
        if (!(propensity.e > 0.0 && propensity.e < 1.0)) throw config_error("known propensity must lie in (0,1)");
    } else {
        const Matrix xa = augmented_matrix(rct.x);
        const Vec beta = logistic_fit(xa, rct.t);
        std::size_t clipped = 0;
        for (std::size_t i = 0; i < rct.n(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-dot(xa.row(i), beta)));
            e[i] = std::min(std::max(p, cfg.clip_lo), cfg.clip_hi);
            if (e[i] != p) ++clipped;
        }
        if (clipped > 0)
            model.notes.push_back("clipped " + std::to_string(clipped) + " propensity estimates to (" +
                                  std::to_string(cfg.clip_lo) + ", " + std::to_string(cfg.clip_hi) + ")");
    }

    bool deficient = false;
    if (target == KallusTarget::cate) {
        // theta fits q(x) y - f_tau(x) against x over the randomized rows
        Vec resp(rct.n());
        for (std::size_t i = 0; i < rct.n(); ++i) {
            const double q = rct.t[i] ? 1.0 / e[i] : -1.0 / (1.0 - e[i]);
            resp[i] = q * rct.y[i] - model.base_cate(rct.x.row(i));
        }
        model.theta = lstsq_min_norm(rct.x, resp, &deficient);
    } else {
        for (int arm : {0, 1}) {
            const auto rows = rct.arm_rows(arm);
            if (rows.empty()) throw fit_error("randomized data has no samples in arm " + std::to_string(arm));
            Matrix z(rows.size(), rct.dim());
            Vec resp(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                std::copy(rct.x.row(rows[k]).begin(), rct.x.row(rows[k]).end(), z.row(k).begin());
                resp[k] = rct.y[rows[k]] - model.base_outcome(rct.x.row(rows[k]), arm);
            }
            bool arm_deficient = false;
            model.theta_arm[arm] = lstsq_min_norm(z, resp, &arm_deficient);
            deficient = deficient || arm_deficient;
        }
    }
    if (deficient) model.notes.push_back("correction regression was rank deficient; used the minimum-norm solution");
    return model;
}

}  // namespace cornet
