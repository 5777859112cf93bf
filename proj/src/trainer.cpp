#include "cornet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cornet/cornet.hpp"

namespace cornet {

Matrix augmented_matrix(const Matrix& x) {
    Matrix out(x.rows, x.cols + 1);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::copy(x.row(i).begin(), x.row(i).end(), out.row(i).begin());
        out(i, x.cols) = 1.0;
    }
    return out;
}

Vec representation_of(const LayerStack& phi, bool augment, std::span<const double> x) {
    if (augment) return forward(phi, augmented_input(x));
    return forward(phi, x);
}

namespace {

struct AdamVec {
    Vec m, v;
    long t = 0;
    explicit AdamVec(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    void step(Vec& w, const Vec& g, const TrainControls& ctl) {
        ++t;
        adam_update_block(w, g, m, v, t, ctl.learning_rate, ctl.beta1, ctl.beta2, ctl.epsilon);
    }
};

Vec head_init(std::size_t d_phi, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_phi));
    std::uniform_real_distribution<double> u(-bound, bound);
    Vec w(d_phi);
    for (double& v : w) v = u(rng);
    return w;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

RepresentationFit train_representation(const TrainTask& task, const NetArch& arch, const TrainControls& ctl,
                                       Rng& rng) {
    const Matrix& x_raw = *task.x;
    const std::vector<int>& t = *task.t;
    const Vec& y = *task.y;
    const std::size_t n = x_raw.rows;
    if (n == 0) throw fit_error("no training rows");
    if (t.size() != n || y.size() != n) throw shape_error("train: x/t/y row counts differ");

    std::array<std::size_t, 2> arm_count = {0, 0};
    for (int v : t) ++arm_count[v];
    if (arm_count[0] < 2 || arm_count[1] < 2)
        throw fit_error("need at least 2 samples per treatment arm (have " + std::to_string(arm_count[0]) + "/" +
                        std::to_string(arm_count[1]) + ")");

    Vec weights = task.weights;
    if (weights.empty()) weights.assign(n, 1.0);
    if (weights.size() != n) throw shape_error("train: weight length mismatch");
    double norm = task.weight_normalizer;
    if (norm <= 0.0) norm = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (norm <= 0.0) throw fit_error("weight normalizer is zero");

    const bool balancing = task.lambda_d > 0.0;
    if (balancing && (task.balance_x == nullptr || task.balance_x->rows == 0))
        throw fit_error("balancing requested without randomized covariates");

    const Matrix x = augmented_matrix(x_raw);
    const std::size_t d_in = x.cols;

    std::vector<std::size_t> phi_dims;
    phi_dims.push_back(d_in);
    for (auto h : arch.phi_hidden) phi_dims.push_back(h);
    phi_dims.push_back(arch.d_phi);

    RepresentationFit fit;
    fit.phi = make_stack(phi_dims, Activation::identity, rng);
    fit.heads[1] = head_init(arch.d_phi, rng);
    fit.heads[0] = head_init(arch.d_phi, rng);
    if (balancing) {
        std::vector<std::size_t> adv_dims;
        adv_dims.push_back(arch.d_phi);
        for (auto h : arch.adversary_hidden) adv_dims.push_back(h);
        adv_dims.push_back(1);
        fit.adversary = make_stack(adv_dims, Activation::sigmoid, rng);
        fit.adversary_trained = true;
    }

    OptimizerState phi_opt = OptimizerState::init(fit.phi, ctl.learning_rate, ctl.beta1, ctl.beta2, ctl.epsilon);
    OptimizerState adv_opt;
    if (balancing) adv_opt = OptimizerState::init(fit.adversary, ctl.learning_rate, ctl.beta1, ctl.beta2, ctl.epsilon);
    std::array<AdamVec, 2> head_opt = {AdamVec(arch.d_phi), AdamVec(arch.d_phi)};

    const std::size_t batch = n <= ctl.full_batch_limit ? n : std::min(ctl.batch, n);
    const std::size_t steps_per_epoch = (n + batch - 1) / batch;
    const std::size_t epochs =
        ctl.epochs > 0 ? ctl.epochs : std::max<std::size_t>(1, (ctl.target_steps + steps_per_epoch - 1) / steps_per_epoch);

    const std::size_t m = balancing ? (task.mixup_m > 0 ? task.mixup_m : n) : 0;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    Matrix xb, interp_aug, dz, adv_in, d_logit, dz_adv, phi_in_grad;
    std::vector<int> tb;
    Vec yb, wb;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        // fresh interpolations each epoch
        if (balancing) {
            Matrix interp = mixup_augment(*task.balance_x, x_raw, task.mixup_alpha, m, rng);
            interp_aug = augmented_matrix(interp);
        }
        std::shuffle(perm.begin(), perm.end(), rng);

        double epoch_loss_acc = 0.0;
        double epoch_disc_acc = 0.0;
        std::size_t interp_cursor = 0;

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t bsz = std::min(batch, n - start);
            xb = Matrix(bsz, d_in);
            tb.resize(bsz);
            yb.resize(bsz);
            wb.resize(bsz);
            for (std::size_t i = 0; i < bsz; ++i) {
                const std::size_t r = perm[start + i];
                std::copy(x.row(r).begin(), x.row(r).end(), xb.row(i).begin());
                tb[i] = t[r];
                yb[i] = y[r];
                wb[i] = weights[r];
            }

            ForwardCache cache = forward_batch(fit.phi, xb);
            const Matrix& z = cache.preact;  // identity output

            // weighted squared loss and gradients
            const double grad_scale = static_cast<double>(n) / (static_cast<double>(bsz) * norm);
            dz = Matrix(bsz, arch.d_phi);
            std::array<Vec, 2> head_grad = {Vec(arch.d_phi, 0.0), Vec(arch.d_phi, 0.0)};
            for (std::size_t i = 0; i < bsz; ++i) {
                const int arm = tb[i];
                const double pred = dot(z.row(i), fit.heads[arm]);
                const double err = pred - yb[i];
                epoch_loss_acc += wb[i] * err * err;
                const double dpred = 2.0 * wb[i] * err * grad_scale;
                for (std::size_t j = 0; j < arch.d_phi; ++j) {
                    dz(i, j) = dpred * fit.heads[arm][j];
                    head_grad[arm][j] += dpred * z(i, j);
                }
            }

            GradientSet adv_grads;
            double batch_disc = 0.0;
            ForwardCache interp_cache;
            if (balancing) {
                // slice of this epoch's interpolations, cycled when m != n
                Matrix xi(bsz, d_in);
                for (std::size_t i = 0; i < bsz; ++i) {
                    const std::size_t r = (interp_cursor + i) % m;
                    std::copy(interp_aug.row(r).begin(), interp_aug.row(r).end(), xi.row(i).begin());
                }
                interp_cursor += bsz;
                interp_cache = forward_batch(fit.phi, xi);
                const Matrix& zi = interp_cache.preact;

                // adversary sees observational (label 0) then interpolated (label 1)
                adv_in = Matrix(bsz * 2, arch.d_phi);
                std::copy(z.a.begin(), z.a.end(), adv_in.a.begin());
                std::copy(zi.a.begin(), zi.a.end(), adv_in.a.begin() + z.a.size());
                ForwardCache adv_cache = forward_batch(fit.adversary, adv_in);

                d_logit = Matrix(bsz * 2, 1);
                std::size_t hard_obs = 0, hard_int = 0;
                for (std::size_t i = 0; i < bsz * 2; ++i) {
                    const double logit = adv_cache.preact(i, 0);
                    const double p = sigmoid(logit);
                    const bool is_interp = i >= bsz;
                    // cross-entropy from logits, per-side means
                    d_logit(i, 0) = (p - (is_interp ? 1.0 : 0.0)) / static_cast<double>(bsz);
                    if (is_interp ? p <= 0.5 : p > 0.5) (is_interp ? hard_int : hard_obs) += 1;
                }
                const double err_sum = (static_cast<double>(hard_obs) + static_cast<double>(hard_int)) /
                                       static_cast<double>(bsz);
                batch_disc = 2.0 * (1.0 - std::min(err_sum, 1.0));
                epoch_disc_acc += batch_disc;

                dz_adv = Matrix();
                adv_grads = backward_batch(fit.adversary, adv_cache, d_logit, &dz_adv);

                // gradient reversal into the representation, scaled by lambda_d
                for (std::size_t i = 0; i < bsz; ++i)
                    for (std::size_t j = 0; j < arch.d_phi; ++j) dz(i, j) += -task.lambda_d * dz_adv(i, j);
            }

            GradientSet phi_grads = backward_batch(fit.phi, cache, dz);
            if (balancing) {
                Matrix dz_interp(bsz, arch.d_phi);
                for (std::size_t i = 0; i < bsz; ++i)
                    for (std::size_t j = 0; j < arch.d_phi; ++j)
                        dz_interp(i, j) = -task.lambda_d * dz_adv(bsz + i, j);
                GradientSet phi_grads_interp = backward_batch(fit.phi, interp_cache, dz_interp);
                phi_grads.add_scaled(phi_grads_interp, 1.0);
            }

            adam_step(phi_opt, phi_grads, fit.phi);
            for (int arm : {0, 1}) head_opt[arm].step(fit.heads[arm], head_grad[arm], ctl);
            if (balancing) adam_step(adv_opt, adv_grads, fit.adversary);
        }

        const double reg = epoch_loss_acc / norm;
        fit.log.reg_loss.push_back(reg);
        if (balancing) {
            const double disc = epoch_disc_acc / static_cast<double>(steps_per_epoch);
            fit.log.discrepancy.push_back(disc);
            fit.log.objective.push_back(reg + task.lambda_d * disc);
        } else {
            fit.log.objective.push_back(reg);
        }
        const double obj = fit.log.objective.back();
        if (!std::isfinite(obj) || obj > ctl.divergence_limit)
            throw numeric_error("training diverged at epoch " + std::to_string(epoch) +
                                " (objective = " + std::to_string(obj) + ")");
    }

    fit.log.max_weight_norm = fit.phi.max_weight_norm_1inf();
    return fit;
}

}  // namespace cornet
