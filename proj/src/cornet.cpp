#include "cornet/cornet.hpp"

#include <cmath>

namespace cornet {

MixupDraw mixup_augment_detailed(const Matrix& x_unc, const Matrix& x_conf, std::size_t m,
                                 const std::function<double(Rng&)>& mu_sampler, Rng& rng) {
    if (x_unc.rows == 0 || x_conf.rows == 0) throw fit_error("mixup: empty input set");
    if (x_unc.cols != x_conf.cols) throw shape_error("mixup: covariate dimensions differ");
    if (m == 0) throw fit_error("mixup: m must be >= 1");
    MixupDraw draw;
    draw.x = Matrix(m, x_conf.cols);
    draw.unc_rows.resize(m);
    draw.mu.resize(m);
    std::uniform_int_distribution<std::size_t> pick(0, x_unc.rows - 1);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t ci = r % x_conf.rows;
        const std::size_t ui = pick(rng);
        const double mu = mu_sampler(rng);
        draw.unc_rows[r] = ui;
        draw.mu[r] = mu;
        for (std::size_t j = 0; j < x_conf.cols; ++j)
            draw.x(r, j) = mu * x_unc(ui, j) + (1.0 - mu) * x_conf(ci, j);
    }
    return draw;
}

Matrix mixup_augment(const Matrix& x_unc, const Matrix& x_conf, double alpha, std::size_t m, Rng& rng) {
    if (alpha <= 0.0) throw config_error("mixup: alpha must be positive");
    auto sampler = [alpha](Rng& r) { return draw_beta_symmetric(r, alpha); };
    return mixup_augment_detailed(x_unc, x_conf, m, sampler, rng).x;
}

double default_lambda_delta(std::size_t d_phi, std::size_t n_unc) {
    if (d_phi < 2 || n_unc < 3)
        throw config_error("default_lambda_delta needs d_phi >= 2 and n_unc >= 3");
    const double c0 = 1.0 / static_cast<double>(d_phi);
    return std::sqrt(c0 * std::log(static_cast<double>(d_phi)) / std::log(static_cast<double>(n_unc)));
}

double predict_cate(const CornetModel& model, std::span<const double> x) {
    const Vec z = representation_of(model.phi, model.augment_input, x);
    Vec head1 = model.w_c[1];
    Vec head0 = model.w_c[0];
    for (std::size_t j = 0; j < head1.size(); ++j) {
        head1[j] += model.delta[1][j];
        head0[j] += model.delta[0][j];
    }
    return dot(z, head1) - dot(z, head0);
}

double CornetModel::predict(std::span<const double> x) const { return predict_cate(*this, x); }

RepresentationFit fit_step1(const CombinedData& data, const Step1Config& cfg, Rng& rng) {
    data.obs.validate();
    const double lambda_d =
        cfg.lambda_d ? *cfg.lambda_d : default_lambda_delta(cfg.arch.d_phi, std::max<std::size_t>(data.rand.n(), 3));
    TrainTask task;
    task.x = &data.obs.x;
    task.t = &data.obs.t;
    task.y = &data.obs.y;
    task.lambda_d = lambda_d;
    task.mixup_alpha = cfg.mixup_alpha;
    task.mixup_m = cfg.m;
    if (lambda_d > 0.0) task.balance_x = &data.rand.x;
    return train_representation(task, cfg.arch, cfg.train, rng);
}

std::array<Vec, 2> fit_step2(const LayerStack& phi, const std::array<Vec, 2>& w_c,
                             const TreatmentDataset& rand, const Step2Config& cfg, bool augment) {
    rand.validate();
    const double lambda_delta =
        cfg.lambda_delta ? *cfg.lambda_delta : default_lambda_delta(phi.output_dim(), rand.n());
    if (lambda_delta < 0.0) throw config_error("lambda_delta must be nonnegative");

    const std::size_t d_phi = phi.output_dim();
    std::array<Vec, 2> delta;
    for (int arm : {0, 1}) {
        const auto rows = rand.arm_rows(arm);
        if (rows.empty()) throw fit_error("randomized data has no samples in arm " + std::to_string(arm));
        LassoProblem prob;
        prob.z = Matrix(rows.size(), d_phi);
        prob.y.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const Vec z = representation_of(phi, augment, rand.x.row(rows[k]));
            std::copy(z.begin(), z.end(), prob.z.row(k).begin());
            prob.y[k] = rand.y[rows[k]] - dot(z, w_c[arm]);
        }
        // per-arm penalty scaled so the pair of solves minimizes the joint
        // (1/n_unc)-normalized objective
        prob.lambda = lambda_delta * static_cast<double>(rand.n()) / static_cast<double>(rows.size());
        delta[arm] = lasso_cd(prob, cfg.tol, cfg.max_sweeps).coef;
    }
    return delta;
}

CornetFit fit_cornet(const CombinedData& data, const Step1Config& s1, const Step2Config& s2, Rng& rng) {
    data.validate();
    const double lambda_delta =
        s2.lambda_delta ? *s2.lambda_delta : default_lambda_delta(s1.arch.d_phi, data.rand.n());

    RepresentationFit step1 = fit_step1(data, s1, rng);

    Step2Config s2_resolved = s2;
    s2_resolved.lambda_delta = lambda_delta;
    std::array<Vec, 2> delta = fit_step2(step1.phi, step1.heads, data.rand, s2_resolved, true);

    CornetFit out;
    out.model.phi = std::move(step1.phi);
    out.model.w_c = std::move(step1.heads);
    out.model.delta = std::move(delta);
    out.model.lambda_d = s1.lambda_d ? *s1.lambda_d : default_lambda_delta(s1.arch.d_phi, data.rand.n());
    out.model.lambda_delta = lambda_delta;
    out.model.augment_input = true;
    out.log = std::move(step1.log);
    return out;
}

}  // namespace cornet
