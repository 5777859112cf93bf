#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cornet/baselines.hpp"
#include "cornet/datagen.hpp"
#include "cornet/experiment.hpp"
#include "cornet/metrics.hpp"
#include "cornet/model_io.hpp"

using namespace cornet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_simulated(const CombinedData& data, const SyntheticTruth* truth, const DgpConfig* cfg,
                     const std::string& out_dir, std::uint64_t seed, std::size_t test_rows) {
    std::filesystem::create_directories(out_dir);
    write_csv(data.obs, out_dir + "/obs.csv");
    write_csv(data.rand, out_dir + "/rand.csv");
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("seed", std::to_string(seed));
    if (cfg != nullptr) {
        meta.emplace_back("scenario", scenario_name(cfg->scenario));
        meta.emplace_back("d", std::to_string(cfg->d));
        meta.emplace_back("d_phi", std::to_string(cfg->d_phi));
        meta.emplace_back("n_conf", std::to_string(cfg->n_conf));
        meta.emplace_back("n_unc", std::to_string(cfg->n_unc));
        meta.emplace_back("sigma_u", std::to_string(cfg->sigma_u));
        meta.emplace_back("sigma_eps", std::to_string(cfg->sigma_eps));
        meta.emplace_back("beta", std::to_string(cfg->beta));
        if (cfg->scenario == Scenario::no_shared_rep) meta.emplace_back("beta_phi", std::to_string(cfg->beta_phi));
        if (cfg->scenario == Scenario::overlap_cube || cfg->scenario == Scenario::matched_gaussian)
            meta.emplace_back("a", std::to_string(cfg->cube_a));
    } else {
        meta.emplace_back("scenario", "csv_confound_split");
    }
    write_meta(out_dir + "/meta.txt", meta);

    if (truth != nullptr) {
        Rng test_rng = make_rng(mix_seed(seed, 2));
        Matrix x_test = draw_gaussian_matrix(test_rng, test_rows, data.obs.dim());
        write_tau_csv(x_test, truth->tau_rows(x_test), out_dir + "/test.csv");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CATE estimation from combined observational and randomized data"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "generate a combined dataset pair (synthetic or from a CSV)");
    std::string sim_config, sim_out = "sim_out", sim_csv;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    std::size_t sim_select_col = 0, sim_rand_size = 0, sim_test_rows = 2000;
    double sim_c = 0.0;
    sim->add_option("--config", sim_config, "DGP config file ([scenario] section)");
    sim->add_option("--from-csv", sim_csv, "source unconfounded CSV (confounding protocol mode)");
    sim->add_option("--select-col", sim_select_col, "0-based covariate index steering randomized selection");
    sim->add_option("--rand-size", sim_rand_size, "randomized sample count (0 = 2d)");
    sim->add_option("--c", sim_c, "outcome-threshold offset in sd units");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--seed", sim_seed, "seed")->each([&](const std::string&) { sim_seed_set = true; });
    sim->add_option("--test-rows", sim_test_rows, "rows in the tau-reference test CSV");

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "train one estimator and serialize the model");
    std::string fit_name, fit_obs, fit_rand, fit_out = "model.txt";
    std::uint64_t fit_seed = 0;
    std::size_t fit_dphi = 8;
    fit->add_option("--estimator", fit_name, "estimator name")->required();
    fit->add_option("--obs", fit_obs, "observational CSV");
    fit->add_option("--rand", fit_rand, "randomized CSV");
    fit->add_option("--out", fit_out, "model output path");
    fit->add_option("--seed", fit_seed, "seed");
    fit->add_option("--d-phi", fit_dphi, "representation width");

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "sqrt PEHE of a serialized model against a tau-reference CSV");
    std::string ev_model, ev_test;
    ev->add_option("--model", ev_model, "model file")->required();
    ev->add_option("--test", ev_test, "test CSV with x1..xd,tau")->required();

    // ---- experiment ----
    auto* ex = app.add_subcommand("experiment", "run a configured sweep and write raw/aggregate CSVs");
    std::string ex_config, ex_out, ex_estimators;
    std::uint64_t ex_seed = 0;
    bool ex_seed_set = false;
    int ex_par = 0;
    ex->add_option("--config", ex_config, "experiment config file")->required();
    ex->add_option("--out", ex_out, "output directory (overrides config)");
    ex->add_option("--seed", ex_seed, "seed (overrides config)")->each([&](const std::string&) { ex_seed_set = true; });
    ex->add_option("--parallelism", ex_par, "worker threads (overrides config)");
    ex->add_option("--estimators", ex_estimators, "comma list (overrides config)");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "re-aggregate a raw CSV (idempotent)");
    std::string rep_raw, rep_out = "aggregate.csv";
    rep->add_option("--raw", rep_raw, "raw CSV path")->required();
    rep->add_option("--out", rep_out, "aggregate CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            if (!sim_csv.empty()) {
                const TreatmentDataset source = load_csv(sim_csv);
                const std::size_t rsize = sim_rand_size > 0 ? sim_rand_size : 2 * source.dim();
                Rng rng = make_rng(sim_seed);
                const ConfoundSplit split = confound_split(source, sim_select_col, rsize, sim_c, rng);
                write_simulated(split.data, nullptr, nullptr, sim_out, sim_seed, sim_test_rows);
                // tau reference from a two-head fit on the full unconfounded dataset
                BaselineConfig bcfg;
                Rng gt_rng = make_rng(mix_seed(sim_seed, 7));
                const TwoHeadModel gt = fit_tau_conf(source, bcfg, gt_rng);
                Vec tau(source.n());
                for (std::size_t i = 0; i < source.n(); ++i) tau[i] = gt.predict_cate(source.x.row(i));
                write_tau_csv(source.x, tau, sim_out + "/test.csv");
            } else {
                if (sim_config.empty()) throw config_error("simulate needs --config or --from-csv");
                DgpConfig cfg = load_dgp_config(sim_config);
                if (sim_seed_set) cfg.seed = sim_seed;
                Rng rng = make_rng(mix_seed(cfg.seed, 1));
                auto [data, truth] = sample_scenario(cfg, rng);
                write_simulated(data, &truth, &cfg, sim_out, cfg.seed, sim_test_rows);
            }
            std::cout << "wrote " << sim_out << "/{obs.csv,rand.csv,test.csv,meta.txt}\n";
        } else if (fit->parsed()) {
            ExperimentSpec spec;
            spec.arch.d_phi = fit_dphi;
            CombinedData data;
            const bool needs_obs = fit_name != "tau_unc";
            const bool needs_rand = fit_name != "tau_conf";
            if (needs_obs && fit_obs.empty()) throw config_error("estimator '" + fit_name + "' needs --obs");
            if (needs_rand && fit_rand.empty()) throw config_error("estimator '" + fit_name + "' needs --rand");
            if (!fit_obs.empty()) data.obs = load_csv(fit_obs);
            if (!fit_rand.empty()) data.rand = load_csv(fit_rand);
            if (fit_obs.empty()) data.obs = data.rand;    // placeholders keep CombinedData valid
            if (fit_rand.empty()) data.rand = data.obs;
            Rng rng = make_rng(fit_seed);
            fit_estimator(fit_name, data, spec, rng, fit_out);
            std::cout << "wrote " << fit_out << '\n';
        } else if (ev->parsed()) {
            const LoadedModel model = load_model(ev_model);
            Matrix x;
            Vec tau;
            load_tau_csv(ev_test, x, tau);
            if (x.cols != model.input_dim)
                throw config_error("model expects " + std::to_string(model.input_dim) + " covariates, test has " +
                                   std::to_string(x.cols));
            const double pehe = pehe_hat(model.cate, x, tau);
            std::printf("sqrt_pehe %.10g\n", std::sqrt(pehe));
        } else if (ex->parsed()) {
            ExperimentSpec spec = load_experiment_config(ex_config);
            if (!ex_out.empty()) spec.out_dir = ex_out;
            if (ex_seed_set) spec.seed = ex_seed;
            if (ex_par > 0) spec.parallelism = ex_par;
            if (!ex_estimators.empty()) {
                spec.estimators.clear();
                std::stringstream ss(ex_estimators);
                std::string item;
                while (std::getline(ss, item, ',')) spec.estimators.push_back(item);
                spec.validate();
            }
            const RunRecord rec = run_experiment(spec);
            std::cout << "wrote " << spec.out_dir << "/raw.csv (" << rec.rows.size() << " rows) and "
                      << spec.out_dir << "/aggregate.csv\n";
        } else if (rep->parsed()) {
            const auto rows = read_raw_csv(rep_raw);
            write_aggregate_csv(aggregate_rows(rows), rep_out);
            std::cout << "wrote " << rep_out << '\n';
        }
    } catch (const config_error& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const parse_error& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
