#include "cornet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cornet/linalg.hpp"
#include "cornet/trainer.hpp"

namespace cornet {

double pehe_hat(const std::function<double(std::span<const double>)>& predictor, const Matrix& x_test,
                std::span<const double> tau_ref) {
    if (x_test.rows == 0) throw shape_error("pehe_hat: empty test set");
    if (tau_ref.size() != x_test.rows) throw shape_error("pehe_hat: reference length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x_test.rows; ++i) {
        const double d = predictor(x_test.row(i)) - tau_ref[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x_test.rows);
}

namespace {

Matrix map_through(const LayerStack* phi, bool augment, const Matrix& x) {
    if (phi == nullptr) return x;
    Matrix out(x.rows, phi->output_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
        const Vec z = representation_of(*phi, augment, x.row(i));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double h_div_probe(const LayerStack* phi, bool augment, const Matrix& x_obs, const Matrix& x_rand,
                   const HDivProbeConfig& cfg, Rng& rng) {
    if (x_obs.rows < cfg.min_rows || x_rand.rows < cfg.min_rows)
        throw fit_error("h_div_probe needs at least " + std::to_string(cfg.min_rows) + " rows per side");
    const Matrix z_obs = map_through(phi, augment, x_obs);
    const Matrix z_rand = map_through(phi, augment, x_rand);
    const std::size_t d = z_obs.cols;

    auto split = [&](const Matrix& z, std::vector<std::size_t>& train, std::vector<std::size_t>& held) {
        std::vector<std::size_t> idx(z.rows);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_fraction * z.rows));
        train.assign(idx.begin(), idx.begin() + n_train);
        held.assign(idx.begin() + n_train, idx.end());
        if (held.empty()) {
            held.push_back(train.back());
            train.pop_back();
        }
    };
    std::vector<std::size_t> obs_tr, obs_ho, rand_tr, rand_ho;
    split(z_obs, obs_tr, obs_ho);
    split(z_rand, rand_tr, rand_ho);

    std::vector<std::size_t> dims;
    dims.push_back(d);
    for (auto h : cfg.adversary_hidden) dims.push_back(h);
    dims.push_back(1);
    LayerStack adv = make_stack(dims, Activation::sigmoid, rng);
    OptimizerState opt = OptimizerState::init(adv, cfg.learning_rate);

    // train stacked batches: obs first (label 0), then rand (label 1)
    const std::size_t n0 = obs_tr.size(), n1 = rand_tr.size();
    Matrix train_x(n0 + n1, d);
    for (std::size_t i = 0; i < n0; ++i)
        std::copy(z_obs.row(obs_tr[i]).begin(), z_obs.row(obs_tr[i]).end(), train_x.row(i).begin());
    for (std::size_t i = 0; i < n1; ++i)
        std::copy(z_rand.row(rand_tr[i]).begin(), z_rand.row(rand_tr[i]).end(), train_x.row(n0 + i).begin());

    std::vector<std::size_t> perm(n0 + n1);
    std::iota(perm.begin(), perm.end(), 0);
    const std::size_t batch = std::min(cfg.batch, perm.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t start = 0; start < perm.size(); start += batch) {
            const std::size_t bsz = std::min(batch, perm.size() - start);
            Matrix xb(bsz, d);
            std::vector<int> lb(bsz);
            for (std::size_t i = 0; i < bsz; ++i) {
                const std::size_t r = perm[start + i];
                std::copy(train_x.row(r).begin(), train_x.row(r).end(), xb.row(i).begin());
                lb[i] = r >= n0 ? 1 : 0;
            }
            ForwardCache cache = forward_batch(adv, xb);
            Matrix d_logit(bsz, 1);
            for (std::size_t i = 0; i < bsz; ++i) {
                const double p = sigmoid(cache.preact(i, 0));
                d_logit(i, 0) = (p - static_cast<double>(lb[i])) / static_cast<double>(bsz);
            }
            GradientSet g = backward_batch(adv, cache, d_logit);
            adam_step(opt, g, adv);
        }
    }

    // hard 0/1 error-sum on the held-out split, per-side means
    auto side_error = [&](const Matrix& z, const std::vector<std::size_t>& rows, int label) {
        std::size_t wrong = 0;
        for (std::size_t r : rows) {
            const Vec out = forward(adv, z.row(r));
            const int pred = out[0] > 0.5 ? 1 : 0;
            if (pred != label) ++wrong;
        }
        return static_cast<double>(wrong) / static_cast<double>(rows.size());
    };
    const double err_sum = side_error(z_rand, rand_ho, 1) + side_error(z_obs, obs_ho, 0);
    return 2.0 * (1.0 - std::min(err_sum, 1.0));
}

double min_eig_diagnostic(const LayerStack& phi, bool augment, const TreatmentDataset& rand, int arm) {
    const auto rows = rand.arm_rows(arm);
    if (rows.empty()) throw fit_error("min_eig_diagnostic: arm " + std::to_string(arm) + " is empty");
    const std::size_t d_phi = phi.output_dim();
    Matrix z(rows.size(), d_phi);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Vec zi = representation_of(phi, augment, rand.x.row(rows[k]));
        std::copy(zi.begin(), zi.end(), z.row(k).begin());
    }
    Matrix cov(d_phi, d_phi);
    gemm_tn(z, z, cov);
    const double inv_n = 1.0 / static_cast<double>(rand.n());
    for (double& v : cov.a) v *= inv_n;
    return jacobi_eigen(cov).values.front();
}

DiagnosticsRecord diagnose(const LayerStack& phi, bool augment, const CombinedData& data,
                           const HDivProbeConfig& cfg, Rng& rng) {
    DiagnosticsRecord rec;
    rec.h_div = h_div_probe(&phi, augment, data.obs.x, data.rand.x, cfg, rng);
    for (int arm : {0, 1}) rec.min_eig_by_arm[arm] = min_eig_diagnostic(phi, augment, data.rand, arm);
    rec.max_weight_norm = phi.max_weight_norm_1inf();
    return rec;
}

}  // namespace cornet
