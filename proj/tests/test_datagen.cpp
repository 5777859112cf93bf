#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace cornet;
using test_helpers::ks_statistic;

namespace {

DgpConfig paper_cfg() {
    DgpConfig cfg;
    cfg.scenario = Scenario::shared_rep;
    cfg.d = 10;
    cfg.d_phi = 8;
    cfg.n_conf = 500;
    cfg.n_unc = 500;
    return cfg;
}

}  // namespace

TEST_CASE("beta = 0 makes the arms share heads and Delta vanish") {
    DgpConfig cfg = paper_cfg();
    cfg.beta = 0.0;
    Rng rng = make_rng(1);
    auto [data, truth] = sample_shared_rep(cfg, rng);
    for (int arm : {0, 1}) CHECK(truth.w_u[arm] == truth.w_c[arm]);
    Rng mc = make_rng(2);
    CHECK(estimate_delta(truth, 10000, mc) <= 1e-10);
}

TEST_CASE("sigma_u = 1 gives matching covariate laws (mean check)") {
    DgpConfig cfg = paper_cfg();
    cfg.n_conf = 2000;
    cfg.n_unc = 2000;
    Rng rng = make_rng(7);
    auto [data, truth] = sample_shared_rep(cfg, rng);
    for (std::size_t j = 0; j < cfg.d; ++j) {
        double mo = 0.0, mr = 0.0;
        for (std::size_t i = 0; i < data.obs.n(); ++i) mo += data.obs.x(i, j);
        for (std::size_t i = 0; i < data.rand.n(); ++i) mr += data.rand.x(i, j);
        mo /= data.obs.n();
        mr /= data.rand.n();
        CHECK(std::abs(mo - mr) < 4.0 / std::sqrt(2000.0));
    }
}

TEST_CASE("seed determinism: identical (cfg, seed) give bit-identical data") {
    DgpConfig cfg = paper_cfg();
    cfg.beta = 1.0;
    Rng a = make_rng(99), b = make_rng(99);
    auto [da, ta] = sample_shared_rep(cfg, a);
    auto [db, tb] = sample_shared_rep(cfg, b);
    CHECK(da.obs.x.a == db.obs.x.a);
    CHECK(da.obs.y == db.obs.y);
    CHECK(da.rand.x.a == db.rand.x.a);
    CHECK(da.rand.y == db.rand.y);
    CHECK(ta.w_u[1] == tb.w_u[1]);
}

TEST_CASE("Monte-Carlo Delta is nonnegative and zero only at beta = 0") {
    DgpConfig cfg = paper_cfg();
    cfg.beta = 0.7;
    Rng rng = make_rng(3);
    auto [data, truth] = sample_shared_rep(cfg, rng);
    Rng mc = make_rng(4);
    const double delta = estimate_delta(truth, 10000, mc);
    CHECK(delta > 1e-4);
}

TEST_CASE("calibrate_beta hits the target within 5% on an independent Monte Carlo") {
    DgpConfig cfg = paper_cfg();
    cfg.seed = 12345;
    Rng cal = make_rng(cfg.seed);
    const double beta = calibrate_beta(cfg, 4.0, cal);
    CHECK(beta > 0.0);
    // regenerate the same truth with the returned beta and check Delta fresh
    DgpConfig cfg2 = cfg;
    cfg2.beta = beta;
    Rng regen = make_rng(cfg.seed);
    const SyntheticTruth truth = draw_truth(cfg2, regen);
    Rng mc = make_rng(777);
    const double delta = estimate_delta(truth, 100000, mc);
    CHECK(delta == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("calibrate_beta: zero target returns zero beta") {
    DgpConfig cfg = paper_cfg();
    Rng rng = make_rng(5);
    CHECK(calibrate_beta(cfg, 0.0, rng) == 0.0);
}

TEST_CASE("PEHE of the biased limit: target_delta = 4 matches sqrt PEHE 2 at the population level") {
    // tau_conf's limiting predictor phi (w_c1 - w_c0) has PEHE exactly Delta
    DgpConfig cfg = paper_cfg();
    cfg.seed = 2024;
    Rng cal = make_rng(cfg.seed);
    const double beta = calibrate_beta(cfg, 4.0, cal);
    DgpConfig cfg2 = cfg;
    cfg2.beta = beta;
    Rng regen = make_rng(cfg.seed);
    const SyntheticTruth truth = draw_truth(cfg2, regen);
    Rng mc = make_rng(31);
    double acc = 0.0;
    const std::size_t draws = 20000;
    Vec x(cfg.d);
    for (std::size_t i = 0; i < draws; ++i) {
        for (double& v : x) v = draw_gaussian(mc);
        const Vec z = forward(truth.phi_star, x);
        double conf_cate = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) conf_cate += z[j] * (truth.w_c[1][j] - truth.w_c[0][j]);
        const double err = conf_cate - truth.tau(x);
        acc += err * err;
    }
    CHECK(std::sqrt(acc / draws) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("no_shared_rep: beta_phi = 0 collapses to a shared representation") {
    DgpConfig cfg = paper_cfg();
    cfg.scenario = Scenario::no_shared_rep;
    cfg.beta_phi = 0.0;
    Rng rng = make_rng(6);
    const NoSharedRepDraw draw = sample_no_shared_rep(cfg, rng);
    for (std::size_t k = 0; k < draw.phi_conf.weights.size(); ++k)
        CHECK(draw.truth.phi_star.weights[k].a == draw.phi_conf.weights[k].a);
}

TEST_CASE("no_shared_rep: perturbation norm is exact and networks differ") {
    DgpConfig cfg = paper_cfg();
    cfg.scenario = Scenario::no_shared_rep;
    cfg.beta_phi = 0.5;
    Rng rng = make_rng(8);
    const NoSharedRepDraw draw = sample_no_shared_rep(cfg, rng);
    CHECK(norm_1inf(draw.perturbation) == doctest::Approx(0.5).epsilon(1e-12));
    Vec x(cfg.d);
    Rng xr = make_rng(9);
    for (double& v : x) v = draw_gaussian(xr);
    const Vec zu = forward(draw.truth.phi_star, x);
    const Vec zc = forward(draw.phi_conf, x);
    double diff = 0.0;
    for (std::size_t j = 0; j < zu.size(); ++j) diff = std::max(diff, std::abs(zu[j] - zc[j]));
    CHECK(diff > 1e-8);
}

TEST_CASE("overlap cube: randomized covariates live in the hypercube") {
    DgpConfig cfg = paper_cfg();
    cfg.scenario = Scenario::overlap_cube;
    cfg.cube_a = 1.0;
    Rng rng = make_rng(10);
    auto [data, truth] = sample_overlap_cube(cfg, rng);
    for (double v : data.rand.x.a) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("matched gaussian pairing follows the 3-sigma convention") {
    CHECK(matched_sigma(3.0) == doctest::Approx(1.0));
    CHECK(matched_sigma(1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(matched_sigma(0.5) == doctest::Approx(1.0 / 6.0));
    // per-coordinate coverage of the matched gaussian is 0.9973
    Rng rng = make_rng(11);
    std::size_t inside = 0;
    const std::size_t draws = 200000;
    for (std::size_t i = 0; i < draws; ++i)
        if (std::abs(draw_gaussian(rng, 0.0, matched_sigma(1.0))) <= 1.0) ++inside;
    CHECK(static_cast<double>(inside) / draws == doctest::Approx(0.9973).epsilon(0.002));
}

TEST_CASE("treatment balance: |mean(t) - 1/2| <= 3/(2 sqrt n) in >= 99% of runs") {
    DgpConfig cfg = test_helpers::small_shared_cfg();
    cfg.n_conf = 400;
    cfg.n_unc = 4;
    int ok = 0;
    const int runs = 1000;
    for (int r = 0; r < runs; ++r) {
        Rng rng = make_rng(5000 + r);
        auto [data, truth] = sample_shared_rep(cfg, rng);
        double mean = 0.0;
        for (int t : data.obs.t) mean += t;
        mean /= data.obs.n();
        if (std::abs(mean - 0.5) <= 3.0 / (2.0 * std::sqrt(static_cast<double>(data.obs.n())))) ++ok;
    }
    CHECK(ok >= 990);
}

TEST_CASE("beta = 0, sigma_u = 1: outcome laws coincide arm-wise (KS check over 100 seeds)") {
    DgpConfig cfg = paper_cfg();
    cfg.beta = 0.0;
    cfg.n_conf = 500;
    cfg.n_unc = 500;
    int ok = 0;
    const int runs = 100;
    for (int r = 0; r < runs; ++r) {
        Rng rng = make_rng(9000 + r);
        auto [data, truth] = sample_shared_rep(cfg, rng);
        bool pass = true;
        for (int arm : {0, 1}) {
            Vec yo, yr;
            for (std::size_t i = 0; i < data.obs.n(); ++i)
                if (data.obs.t[i] == arm) yo.push_back(data.obs.y[i]);
            for (std::size_t i = 0; i < data.rand.n(); ++i)
                if (data.rand.t[i] == arm) yr.push_back(data.rand.y[i]);
            const double d = ks_statistic(yo, yr);
            const double crit = 1.62762 * std::sqrt(static_cast<double>(yo.size() + yr.size()) /
                                                    (static_cast<double>(yo.size()) * static_cast<double>(yr.size())));
            if (d >= crit) pass = false;
        }
        if (pass) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("confound_split: c = 0 keeps exactly {controls below mean} and {treated above mean}") {
    TreatmentDataset ds;
    ds.x = Matrix(6, 1);
    for (int i = 0; i < 6; ++i) ds.x(i, 0) = i;
    ds.t = {0, 0, 0, 1, 1, 1};
    ds.y = {1.0, 2.0, 6.0, 1.0, 2.0, 6.0};  // control mean 3, treated mean 3
    Rng rng = make_rng(1);
    const ConfoundSplit split = confound_split(ds, 0, 0, 0.0, rng);
    // controls below 3: rows 0 and 1; treated above 3: row 5
    CHECK(split.obs_rows == std::vector<std::size_t>{0, 1, 5});
}

TEST_CASE("confound_split: obs and rand rows are disjoint") {
    Rng rng = make_rng(2);
    TreatmentDataset ds;
    ds.x = draw_gaussian_matrix(rng, 200, 3);
    ds.t.resize(200);
    ds.y.resize(200);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < 200; ++i) {
        ds.t[i] = coin(rng) ? 1 : 0;
        ds.y[i] = draw_gaussian(rng);
    }
    const ConfoundSplit split = confound_split(ds, 1, 20, 0.0, rng);
    for (std::size_t r : split.rand_rows)
        CHECK(std::find(split.obs_rows.begin(), split.obs_rows.end(), r) == split.obs_rows.end());
    CHECK(split.data.rand.n() == 20);
}

TEST_CASE("confound_split: extreme c empties the observational set") {
    Rng rng = make_rng(3);
    TreatmentDataset ds;
    ds.x = draw_gaussian_matrix(rng, 100, 2);
    ds.t.resize(100);
    ds.y.resize(100);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < 100; ++i) {
        ds.t[i] = coin(rng) ? 1 : 0;
        ds.y[i] = draw_gaussian(rng);
    }
    CHECK_THROWS_AS((void)confound_split(ds, 0, 10, 10.0, rng), protocol_error);
}

TEST_CASE("confound_split: randomized selection skews toward large select_col values") {
    Rng rng = make_rng(4);
    TreatmentDataset ds;
    ds.x = draw_gaussian_matrix(rng, 4000, 2);
    ds.t.resize(4000);
    ds.y.resize(4000);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < 4000; ++i) {
        ds.t[i] = coin(rng) ? 1 : 0;
        ds.y[i] = draw_gaussian(rng);
    }
    const ConfoundSplit split = confound_split(ds, 0, 800, 0.0, rng);
    double sel_mean = 0.0;
    for (std::size_t i = 0; i < split.data.rand.n(); ++i) sel_mean += split.data.rand.x(i, 0);
    sel_mean /= split.data.rand.n();
    CHECK(sel_mean > 0.1);  // logistic(2z) weighting pulls the mean up
}
