#include "cornet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cornet {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::shared_rep: return "shared_rep";
        case Scenario::no_shared_rep: return "no_shared_rep";
        case Scenario::overlap_cube: return "overlap_cube";
        case Scenario::matched_gaussian: return "matched_gaussian";
    }
    return "?";
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
    if (name == "shared_rep") return Scenario::shared_rep;
    if (name == "no_shared_rep") return Scenario::no_shared_rep;
    if (name == "overlap_cube") return Scenario::overlap_cube;
    if (name == "matched_gaussian") return Scenario::matched_gaussian;
    return std::nullopt;
}

void DgpConfig::validate() const {
    if (d < 1 || d_phi < 1) throw config_error("dgp: d and d_phi must be positive");
    if (n_conf < 1 || n_unc < 1) throw config_error("dgp: sample counts must be >= 1");
    if (sigma_u <= 0.0) throw config_error("dgp: sigma_u must be positive");
    if (sigma_eps <= 0.0) throw config_error("dgp: sigma_eps must be positive");
    if (beta < 0.0) throw config_error("dgp: beta must be nonnegative");
    if (beta_phi < 0.0) throw config_error("dgp: beta_phi must be nonnegative");
    if ((scenario == Scenario::overlap_cube || scenario == Scenario::matched_gaussian) && cube_a <= 0.0)
        throw config_error("dgp: cube half-width a must be positive");
}

double matched_sigma(double a) { return a / 3.0; }

double SyntheticTruth::tau(std::span<const double> x) const {
    const Vec z = forward(phi_star, x);
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) s += z[j] * (w_u[1][j] - w_u[0][j]);
    return s;
}

Vec SyntheticTruth::tau_rows(const Matrix& x) const {
    Vec out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = tau(x.row(i));
    return out;
}

namespace {

Vec head_uniform(std::size_t d_phi, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_phi));
    std::uniform_real_distribution<double> u(-bound, bound);
    Vec w(d_phi);
    for (double& v : w) v = u(rng);
    return w;
}

// Shared coordinate magnitudes summing to 1, independent sign patterns per
// arm. A degenerate equal-pattern draw would make the arm biases cancel in
// the CATE, so arm 0 is redrawn until the patterns differ.
std::array<Vec, 2> draw_bias_directions(std::size_t d_phi, Rng& rng) {
    Vec mags(d_phi);
    std::normal_distribution<double> g(0.0, 1.0);
    double sum = 0.0;
    for (double& v : mags) {
        v = std::abs(g(rng));
        sum += v;
    }
    if (sum <= 0.0) {
        mags.assign(d_phi, 1.0 / static_cast<double>(d_phi));
        sum = 1.0;
    }
    for (double& v : mags) v /= sum;

    std::bernoulli_distribution coin(0.5);
    std::vector<int> s1(d_phi), s0(d_phi);
    for (auto& s : s1) s = coin(rng) ? 1 : -1;
    for (int tries = 0; tries < 64; ++tries) {
        for (auto& s : s0) s = coin(rng) ? 1 : -1;
        if (s0 != s1) break;
        if (tries == 63) s0[0] = -s1[0];
    }
    std::array<Vec, 2> dirs = {Vec(d_phi), Vec(d_phi)};
    for (std::size_t j = 0; j < d_phi; ++j) {
        dirs[1][j] = s1[j] * mags[j];
        dirs[0][j] = s0[j] * mags[j];
    }
    return dirs;
}

std::vector<std::size_t> phi_dims(const DgpConfig& cfg) {
    std::vector<std::size_t> dims;
    dims.push_back(cfg.d);
    for (auto h : cfg.phi_hidden) dims.push_back(h);
    dims.push_back(cfg.d_phi);
    return dims;
}

// Rescale the last layer so the outcome scale sd(phi(X) . w_c) is ~1; the
// generating weights are otherwise arbitrary and the calibrated error
// targets only make sense on a fixed outcome scale.
void rescale_last_layer(LayerStack& phi, const std::array<Vec, 2>& w_c, Rng& rng) {
    const std::size_t draws = 4096;
    std::normal_distribution<double> g(0.0, 1.0);
    Vec x(phi.input_dim());
    double sumsq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        for (double& v : x) v = g(rng);
        const Vec z = forward(phi, x);
        for (int arm : {0, 1}) {
            double pred = 0.0;
            for (std::size_t j = 0; j < z.size(); ++j) pred += z[j] * w_c[arm][j];
            sumsq += pred * pred;
        }
    }
    const double sd = std::sqrt(sumsq / static_cast<double>(2 * draws));
    if (sd <= 1e-12) throw numeric_error("degenerate generating network: outcome scale ~ 0");
    Matrix& last = phi.weights.back();
    for (double& v : last.a) v /= sd;
}

Matrix gaussian_covariates(std::size_t n, std::size_t d, double sd, Rng& rng) {
    Matrix x(n, d);
    std::normal_distribution<double> g(0.0, sd);
    for (double& v : x.a) v = g(rng);
    return x;
}

Matrix cube_covariates(std::size_t n, std::size_t d, double a, Rng& rng) {
    Matrix x(n, d);
    std::uniform_real_distribution<double> u(-a, a);
    for (double& v : x.a) v = u(rng);
    return x;
}

std::vector<int> bernoulli_treatments(std::size_t n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<int> t(n);
    for (auto& v : t) v = coin(rng) ? 1 : 0;
    return t;
}

TreatmentDataset outcomes_through(const LayerStack& phi, const std::array<Vec, 2>& heads, Matrix x,
                                  std::vector<int> t, double noise_sd, Rng& rng) {
    TreatmentDataset ds;
    ds.y.resize(x.rows);
    std::normal_distribution<double> eps(0.0, noise_sd);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const Vec z = forward(phi, x.row(i));
        double pred = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) pred += z[j] * heads[t[i]][j];
        ds.y[i] = pred + eps(rng);
    }
    ds.x = std::move(x);
    ds.t = std::move(t);
    return ds;
}

}  // namespace

SyntheticTruth draw_truth(const DgpConfig& cfg, Rng& rng) {
    cfg.validate();
    SyntheticTruth truth;
    truth.noise_sd = cfg.sigma_eps;
    truth.phi_star = make_stack(phi_dims(cfg), Activation::identity, rng);
    truth.w_c[1] = head_uniform(cfg.d_phi, rng);
    truth.w_c[0] = head_uniform(cfg.d_phi, rng);
    rescale_last_layer(truth.phi_star, truth.w_c, rng);
    const auto dirs = draw_bias_directions(cfg.d_phi, rng);
    for (int arm : {0, 1}) {
        truth.w_u[arm] = truth.w_c[arm];
        for (std::size_t j = 0; j < cfg.d_phi; ++j) truth.w_u[arm][j] += cfg.beta * dirs[arm][j];
    }
    return truth;
}

static std::pair<CombinedData, SyntheticTruth> sample_gaussian_like(const DgpConfig& cfg, Rng& rng, bool cube_unc) {
    SyntheticTruth truth = draw_truth(cfg, rng);
    CombinedData data;
    {
        Matrix x = gaussian_covariates(cfg.n_conf, cfg.d, 1.0, rng);
        auto t = bernoulli_treatments(cfg.n_conf, rng);
        data.obs = outcomes_through(truth.phi_star, truth.w_c, std::move(x), std::move(t), cfg.sigma_eps, rng);
    }
    {
        const double sigma = cfg.scenario == Scenario::matched_gaussian ? matched_sigma(cfg.cube_a) : cfg.sigma_u;
        Matrix x = cube_unc ? cube_covariates(cfg.n_unc, cfg.d, cfg.cube_a, rng)
                            : gaussian_covariates(cfg.n_unc, cfg.d, sigma, rng);
        auto t = bernoulli_treatments(cfg.n_unc, rng);
        data.rand = outcomes_through(truth.phi_star, truth.w_u, std::move(x), std::move(t), cfg.sigma_eps, rng);
    }
    return {std::move(data), std::move(truth)};
}

std::pair<CombinedData, SyntheticTruth> sample_shared_rep(const DgpConfig& cfg, Rng& rng) {
    if (cfg.scenario != Scenario::shared_rep && cfg.scenario != Scenario::matched_gaussian)
        throw config_error("sample_shared_rep: wrong scenario tag");
    return sample_gaussian_like(cfg, rng, false);
}

std::pair<CombinedData, SyntheticTruth> sample_overlap_cube(const DgpConfig& cfg, Rng& rng) {
    if (cfg.scenario != Scenario::overlap_cube) throw config_error("sample_overlap_cube: wrong scenario tag");
    return sample_gaussian_like(cfg, rng, true);
}

NoSharedRepDraw sample_no_shared_rep(const DgpConfig& cfg, Rng& rng) {
    if (cfg.scenario != Scenario::no_shared_rep) throw config_error("sample_no_shared_rep: wrong scenario tag");
    NoSharedRepDraw draw;
    SyntheticTruth base = draw_truth(cfg, rng);
    draw.phi_conf = base.phi_star;

    // Perturb only the last weight matrix, rescaled to the requested (1,inf) norm.
    const Matrix& wk = draw.phi_conf.weights.back();
    Matrix p = draw_gaussian_matrix(rng, wk.rows, wk.cols);
    const double norm = norm_1inf(p);
    if (cfg.beta_phi == 0.0) {
        p.fill(0.0);
    } else {
        if (norm <= 0.0) throw numeric_error("degenerate perturbation draw");
        for (double& v : p.a) v *= cfg.beta_phi / norm;
    }
    draw.perturbation = p;
    draw.truth = base;
    Matrix& last = draw.truth.phi_star.weights.back();
    for (std::size_t i = 0; i < last.a.size(); ++i) last.a[i] += p.a[i];

    CombinedData data;
    {
        Matrix x = gaussian_covariates(cfg.n_conf, cfg.d, 1.0, rng);
        auto t = bernoulli_treatments(cfg.n_conf, rng);
        data.obs = outcomes_through(draw.phi_conf, base.w_c, std::move(x), std::move(t), cfg.sigma_eps, rng);
    }
    {
        Matrix x = gaussian_covariates(cfg.n_unc, cfg.d, cfg.sigma_u, rng);
        auto t = bernoulli_treatments(cfg.n_unc, rng);
        data.rand = outcomes_through(draw.truth.phi_star, draw.truth.w_u, std::move(x), std::move(t), cfg.sigma_eps, rng);
    }
    draw.data = std::move(data);
    return draw;
}

std::pair<CombinedData, SyntheticTruth> sample_scenario(const DgpConfig& cfg, Rng& rng) {
    switch (cfg.scenario) {
        case Scenario::shared_rep:
        case Scenario::matched_gaussian:
            return sample_shared_rep(cfg, rng);
        case Scenario::overlap_cube:
            return sample_overlap_cube(cfg, rng);
        case Scenario::no_shared_rep: {
            auto draw = sample_no_shared_rep(cfg, rng);
            return {std::move(draw.data), std::move(draw.truth)};
        }
    }
    throw config_error("unknown scenario");
}

double estimate_delta(const SyntheticTruth& truth, std::size_t draws, Rng& rng) {
    Vec diff(truth.w_u[1].size());
    for (std::size_t j = 0; j < diff.size(); ++j)
        diff[j] = (truth.w_u[1][j] - truth.w_c[1][j]) - (truth.w_u[0][j] - truth.w_c[0][j]);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec x(truth.phi_star.input_dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        for (double& v : x) v = g(rng);
        const Vec z = forward(truth.phi_star, x);
        const double b = dot(z, diff);
        sum += b * b;
    }
    return sum / static_cast<double>(draws);
}

double calibrate_beta(const DgpConfig& cfg, double target_delta, Rng& rng, std::size_t draws) {
    if (target_delta < 0.0) throw config_error("calibrate_beta: target must be nonnegative");
    if (target_delta == 0.0) return 0.0;
    DgpConfig probe = cfg;
    probe.beta = 1.0;
    const SyntheticTruth unit = draw_truth(probe, rng);
    // Delta(beta) = beta^2 * C with C the unit-bias Monte-Carlo moment.
    const double c = estimate_delta(unit, std::max<std::size_t>(draws, 10000), rng);
    if (c <= 1e-14) throw numeric_error("calibration failed: bias direction is annihilated by the representation");

    double lo = 0.0;
    double hi = 1.0;
    int expand = 0;
    while (hi * hi * c < target_delta) {
        hi *= 2.0;
        if (++expand > 200) throw numeric_error("calibration failed: cannot bracket target");
    }
    double mid = hi;
    for (int step = 0; step < 60; ++step) {
        mid = 0.5 * (lo + hi);
        if (mid * mid * c < target_delta)
            lo = mid;
        else
            hi = mid;
    }
    const double beta = 0.5 * (lo + hi);
    const double achieved = beta * beta * c;
    if (std::abs(achieved - target_delta) > 0.05 * target_delta)
        throw numeric_error("calibration did not converge within 5% of target");
    return beta;
}

ConfoundSplit confound_split(const TreatmentDataset& data, std::size_t select_col, std::size_t rand_size,
                             double c, Rng& rng) {
    data.validate();
    const std::size_t n = data.n();
    if (select_col >= data.dim()) throw config_error("confound_split: select_col out of range");
    if (rand_size > n) throw config_error("confound_split: rand_size exceeds dataset size");
    if (data.arm_count(0) == 0 || data.arm_count(1) == 0)
        throw protocol_error("confound_split: source data must contain both treatment arms");

    // Arm-wise outcome moments on the source data (sample sd, ddof = 1).
    std::array<double, 2> mean{0.0, 0.0}, sd{0.0, 0.0};
    std::array<std::size_t, 2> count{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        mean[data.t[i]] += data.y[i];
        ++count[data.t[i]];
    }
    for (int arm : {0, 1}) mean[arm] /= static_cast<double>(count[arm]);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = data.y[i] - mean[data.t[i]];
        sd[data.t[i]] += d * d;
    }
    for (int arm : {0, 1})
        sd[arm] = count[arm] > 1 ? std::sqrt(sd[arm] / static_cast<double>(count[arm] - 1)) : 0.0;

    // Randomized selection skewed by the chosen covariate: inclusion weight
    // proportional to logistic(2 * standardized column), sampled without
    // replacement by exponential keys.
    double col_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) col_mean += data.x(i, select_col);
    col_mean /= static_cast<double>(n);
    double col_sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = data.x(i, select_col) - col_mean;
        col_sd += d * d;
    }
    col_sd = n > 1 ? std::sqrt(col_sd / static_cast<double>(n - 1)) : 0.0;
    if (col_sd <= 0.0) col_sd = 1.0;

    std::vector<std::pair<double, std::size_t>> keyed(n);
    std::uniform_real_distribution<double> u01(std::numeric_limits<double>::min(), 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double zc = (data.x(i, select_col) - col_mean) / col_sd;
        const double w = 1.0 / (1.0 + std::exp(-2.0 * zc));
        keyed[i] = {-std::log(u01(rng)) / w, i};  // smallest keys win
    }
    std::sort(keyed.begin(), keyed.end());

    ConfoundSplit out;
    std::vector<char> in_rand(n, 0);
    for (std::size_t k = 0; k < rand_size; ++k) {
        out.rand_rows.push_back(keyed[k].second);
        in_rand[keyed[k].second] = 1;
    }
    std::sort(out.rand_rows.begin(), out.rand_rows.end());

    for (std::size_t i = 0; i < n; ++i) {
        if (in_rand[i]) continue;
        const int arm = data.t[i];
        const bool keep = arm == 0 ? data.y[i] < mean[0] - c * sd[0] : data.y[i] > mean[1] + c * sd[1];
        if (keep) out.obs_rows.push_back(i);
    }

    auto subset = [&](const std::vector<std::size_t>& rows) {
        TreatmentDataset ds;
        ds.x = Matrix(rows.size(), data.dim());
        ds.t.resize(rows.size());
        ds.y.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::size_t i = rows[k];
            std::copy(data.x.row(i).begin(), data.x.row(i).end(), ds.x.row(k).begin());
            ds.t[k] = data.t[i];
            ds.y[k] = data.y[i];
        }
        return ds;
    };
    out.data.obs = subset(out.obs_rows);
    out.data.rand = subset(out.rand_rows);

    for (int arm : {0, 1})
        if (out.data.obs.arm_count(arm) == 0)
            throw protocol_error("confound_split left arm " + std::to_string(arm) +
                                 " of the observational set empty; try a smaller c");
    return out;
}

}  // namespace cornet
