#include "cornet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "cornet/metrics.hpp"
#include "cornet/model_io.hpp"

namespace cornet {

namespace {

// Canonical sweep dimensions, in grid order.
const std::vector<std::string> kSweepKeys = {"n_conf", "n_unc", "sigma_u", "delta_target",
                                             "beta",   "beta_scale", "beta_phi", "a"};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_value(const std::string& key, double v) {
    if (key == "n_conf" || key == "n_unc") return std::to_string(static_cast<long long>(v));
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& known_estimators() {
    static const std::vector<std::string> names = {"tau_unc",          "tau_conf",      "tau_avg",
                                                   "tau_weight",       "kallus_ridge_cate", "kallus_nn_cate",
                                                   "kallus_ridge_out", "kallus_nn_out", "cornet",
                                                   "cornet_plus"};
    return names;
}

static std::size_t estimator_id(const std::string& name) {
    const auto& names = known_estimators();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw config_error("unknown estimator '" + name + "'");
}

void ExperimentSpec::validate() const {
    base.validate();
    if (reps < 1) throw config_error("reps must be >= 1");
    if (parallelism < 1) throw config_error("parallelism must be >= 1");
    if (estimators.empty()) throw config_error("no estimators requested");
    for (const auto& e : estimators) estimator_id(e);
    if (sweep.empty()) throw config_error("at least one sweep dimension is required");
    for (const auto& [key, values] : sweep) {
        if (std::find(kSweepKeys.begin(), kSweepKeys.end(), key) == kSweepKeys.end())
            throw config_error("unknown sweep key '" + key + "'");
        if (values.empty()) throw config_error("sweep key '" + key + "' has no values");
    }
    if (delta_target && *delta_target < 0.0) throw config_error("delta_target must be nonnegative");
}

namespace {

struct GridPoint {
    std::vector<std::pair<std::string, double>> values;  // canonical order
    std::string key_string() const {
        std::string s;
        for (const auto& [k, v] : values) {
            if (!s.empty()) s += '|';
            s += k;
        }
        return s;
    }
    std::string value_string() const {
        std::string s;
        for (const auto& [k, v] : values) {
            if (!s.empty()) s += '|';
            s += fmt_value(k, v);
        }
        return s;
    }
};

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
    // reorder dims canonically
    std::vector<std::pair<std::string, Vec>> dims;
    for (const auto& key : kSweepKeys)
        for (const auto& [k, values] : spec.sweep)
            if (k == key) dims.emplace_back(k, values);

    std::vector<GridPoint> grid;
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        GridPoint p;
        for (std::size_t j = 0; j < dims.size(); ++j) p.values.emplace_back(dims[j].first, dims[j].second[idx[j]]);
        grid.push_back(std::move(p));
        std::size_t j = dims.size();
        while (j-- > 0) {
            if (++idx[j] < dims[j].second.size()) break;
            idx[j] = 0;
            if (j == 0) return grid;
        }
        if (dims.empty()) return grid;
    }
}

struct CellSetup {
    DgpConfig cfg;
    std::optional<double> delta_target;
    double beta_scale = 1.0;
};

CellSetup apply_grid(const ExperimentSpec& spec, const GridPoint& point) {
    CellSetup setup;
    setup.cfg = spec.base;
    setup.delta_target = spec.delta_target;
    for (const auto& [k, v] : point.values) {
        if (k == "n_conf")
            setup.cfg.n_conf = static_cast<std::size_t>(v);
        else if (k == "n_unc")
            setup.cfg.n_unc = static_cast<std::size_t>(v);
        else if (k == "sigma_u")
            setup.cfg.sigma_u = v;
        else if (k == "delta_target")
            setup.delta_target = v;
        else if (k == "beta") {
            setup.cfg.beta = v;
            setup.delta_target.reset();
        } else if (k == "beta_scale")
            setup.beta_scale = v;
        else if (k == "beta_phi")
            setup.cfg.beta_phi = v;
        else if (k == "a")
            setup.cfg.cube_a = v;
    }
    return setup;
}

std::pair<CombinedData, SyntheticTruth> generate_cell_data(const CellSetup& setup, std::uint64_t data_seed) {
    DgpConfig cfg = setup.cfg;
    if (setup.delta_target) {
        Rng cal_rng = make_rng(data_seed);
        cfg.beta = calibrate_beta(cfg, *setup.delta_target, cal_rng);
    }
    cfg.beta *= setup.beta_scale;
    Rng rng = make_rng(data_seed);
    return sample_scenario(cfg, rng);
}

}  // namespace

CateFn fit_estimator(const std::string& name, const CombinedData& data, const ExperimentSpec& spec, Rng& rng,
                     const std::string& model_out_path) {
    BaselineConfig bcfg{spec.arch, spec.train};
    const EstimatorOptions& opts = spec.opts;

    auto wrap_two_head = [&](TwoHeadModel m) -> CateFn {
        if (!model_out_path.empty()) save_model(m, model_out_path);
        auto shared = std::make_shared<TwoHeadModel>(std::move(m));
        return [shared](std::span<const double> x) { return shared->predict_cate(x); };
    };
    auto wrap_kallus = [&](KallusBase base, KallusTarget target) -> CateFn {
        KallusConfig kcfg;
        kcfg.base_cfg = bcfg;
        kcfg.ridge_scale = opts.kallus_ridge_scale;
        KallusModel m = fit_kallus(data, base, target, opts.kallus_propensity, kcfg, rng);
        if (!model_out_path.empty()) save_model(m, model_out_path);
        auto shared = std::make_shared<KallusModel>(std::move(m));
        return [shared](std::span<const double> x) { return shared->predict(x); };
    };
    auto wrap_cornet = [&](std::optional<double> lambda_d, std::optional<double> lambda_delta) -> CateFn {
        Step1Config s1;
        s1.arch = spec.arch;
        s1.train = spec.train;
        s1.lambda_d = lambda_d;
        Step2Config s2;
        s2.lambda_delta = lambda_delta;
        CornetFit fit = fit_cornet(data, s1, s2, rng);
        if (!model_out_path.empty()) save_model(fit.model, model_out_path);
        auto shared = std::make_shared<CornetModel>(std::move(fit.model));
        return [shared](std::span<const double> x) { return shared->predict(x); };
    };

    if (name == "tau_unc") return wrap_two_head(fit_tau_unc(data.rand, bcfg, rng));
    if (name == "tau_conf") return wrap_two_head(fit_tau_conf(data.obs, bcfg, rng));
    if (name == "tau_avg") {
        TwoHeadModel mu = fit_tau_unc(data.rand, bcfg, rng);
        TwoHeadModel mc = fit_tau_conf(data.obs, bcfg, rng);
        if (!model_out_path.empty()) save_avg_model(mu, mc, opts.avg_lambda, model_out_path);
        return make_tau_avg(mu, mc, opts.avg_lambda);
    }
    if (name == "tau_weight") return wrap_two_head(fit_tau_weight(data, opts.weight_lambda_cap, bcfg, rng).model);
    if (name == "kallus_ridge_cate") return wrap_kallus(KallusBase::ridge, KallusTarget::cate);
    if (name == "kallus_nn_cate") return wrap_kallus(KallusBase::nn, KallusTarget::cate);
    if (name == "kallus_ridge_out") return wrap_kallus(KallusBase::ridge, KallusTarget::outcome);
    if (name == "kallus_nn_out") return wrap_kallus(KallusBase::nn, KallusTarget::outcome);
    // the paper's naming: cornet is the unregularized two-step fit,
    // cornet_plus applies the closed-form lambda rules
    if (name == "cornet") return wrap_cornet(0.0, 0.0);
    if (name == "cornet_plus") return wrap_cornet(std::nullopt, std::nullopt);
    throw config_error("unknown estimator '" + name + "'");
}

RunRecord run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto grid = expand_grid(spec);
    const std::size_t n_cells = grid.size() * spec.estimators.size() * static_cast<std::size_t>(spec.reps);

    struct Cell {
        std::size_t grid_idx, est_idx;
        int rep;
    };
    std::vector<Cell> cells;
    cells.reserve(n_cells);
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t e = 0; e < spec.estimators.size(); ++e)
            for (int r = 0; r < spec.reps; ++r) cells.push_back({g, e, r});

    std::vector<RawRow> rows(n_cells);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size()) return;
            const Cell& cell = cells[k];
            const GridPoint& point = grid[cell.grid_idx];
            const std::string est = spec.estimators[cell.est_idx];
            const std::uint64_t cell_seed = mix_seed(spec.seed, cell.grid_idx, static_cast<std::uint64_t>(cell.rep));

            RawRow row;
            row.scenario = scenario_name(spec.base.scenario);
            row.grid_key = point.key_string();
            row.grid_value = point.value_string();
            row.estimator = est;
            row.rep = cell.rep;
            row.seed = cell_seed;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const CellSetup setup = apply_grid(spec, point);
                auto [data, truth] = generate_cell_data(setup, mix_seed(cell_seed, 1));

                Rng test_rng = make_rng(mix_seed(cell_seed, 2));
                Matrix x_test = draw_gaussian_matrix(test_rng, spec.test_rows, setup.cfg.d);
                const Vec tau_ref = truth.tau_rows(x_test);

                Rng est_rng = make_rng(mix_seed(cell_seed, 0x100 + estimator_id(est)));
                CateFn fn = fit_estimator(est, data, spec, est_rng);
                row.sqrt_pehe = std::sqrt(pehe_hat(fn, x_test, tau_ref));
            } catch (const std::exception& ex) {
                row.sqrt_pehe = std::numeric_limits<double>::quiet_NaN();
                std::string msg = ex.what();
                for (char& ch : msg)
                    if (ch == ',' || ch == '\n') ch = ';';
                row.error = msg;
                failures.fetch_add(1);
            }
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_ms = spec.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
            rows[k] = std::move(row);
        }
    };

    const int threads = std::min<int>(spec.parallelism, static_cast<int>(cells.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // canonical order: grid index, then requested estimator order, then rep
    std::vector<std::size_t> order(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Cell&ca = cells[a], &cb = cells[b];
        if (ca.grid_idx != cb.grid_idx) return ca.grid_idx < cb.grid_idx;
        if (ca.est_idx != cb.est_idx) return ca.est_idx < cb.est_idx;
        return ca.rep < cb.rep;
    });
    RunRecord rec;
    rec.rows.reserve(rows.size());
    for (std::size_t k : order) rec.rows.push_back(std::move(rows[k]));

    {
        std::ostringstream h;
        h << spec.seed << ':' << grid.size() << ':' << spec.estimators.size() << ':' << spec.reps;
        rec.spec_hash = std::to_string(splitmix64(std::hash<std::string>{}(h.str())));
    }

    std::filesystem::create_directories(spec.out_dir);
    write_raw_csv(rec.rows, spec.out_dir + "/raw.csv");
    write_aggregate_csv(aggregate_rows(rec.rows), spec.out_dir + "/aggregate.csv");

    if (failures.load() == cells.size()) throw fit_error("every cell of the sweep failed");
    return rec;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<RawRow>& rows) {
    // group in first-appearance order
    std::vector<AggregateRow> out;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<double>> samples;
    for (const auto& r : rows) {
        const std::string key = r.scenario + '\x1f' + r.grid_key + '\x1f' + r.grid_value + '\x1f' + r.estimator;
        auto it = index.find(key);
        std::size_t slot;
        if (it == index.end()) {
            slot = out.size();
            index.emplace(key, slot);
            out.push_back({r.scenario, r.grid_key, r.grid_value, r.estimator, 0.0, 0.0, 0});
            samples.emplace_back();
        } else {
            slot = it->second;
        }
        if (std::isfinite(r.sqrt_pehe)) samples[slot].push_back(r.sqrt_pehe);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& v = samples[i];
        out[i].n_reps = static_cast<int>(v.size());
        if (v.empty()) {
            out[i].mean_sqrt_pehe = std::numeric_limits<double>::quiet_NaN();
            out[i].sd_sqrt_pehe = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double mean = 0.0;
        for (double s : v) mean += s;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double s : v) var += (s - mean) * (s - mean);
        out[i].mean_sqrt_pehe = mean;
        out[i].sd_sqrt_pehe = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    }
    return out;
}

void write_raw_csv(const std::vector<RawRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw parse_error("cannot open '" + path + "' for writing");
    os << "scenario,grid_key,grid_value,estimator,rep,seed,sqrt_pehe,wall_ms,error\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.grid_key << ',' << r.grid_value << ',' << r.estimator << ',' << r.rep << ','
           << r.seed << ',' << fmt_double(r.sqrt_pehe) << ',' << fmt_double(r.wall_ms) << ',' << r.error << '\n';
    }
}

std::vector<RawRow> read_raw_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw parse_error("'" + path + "': empty file");
    std::vector<RawRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        cells.push_back(cur);
        if (cells.size() != 9) throw parse_error("'" + path + "': row " + std::to_string(lineno) + " is not 9 cells");
        RawRow r;
        r.scenario = cells[0];
        r.grid_key = cells[1];
        r.grid_value = cells[2];
        r.estimator = cells[3];
        r.rep = std::stoi(cells[4]);
        r.seed = std::stoull(cells[5]);
        r.sqrt_pehe = std::strtod(cells[6].c_str(), nullptr);
        r.wall_ms = std::strtod(cells[7].c_str(), nullptr);
        r.error = cells[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw parse_error("cannot open '" + path + "' for writing");
    // sd is the sample standard deviation (ddof = 1)
    os << "scenario,grid_key,grid_value,estimator,mean_sqrt_pehe,sd_sqrt_pehe,n_reps\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << r.grid_key << ',' << r.grid_value << ',' << r.estimator << ','
           << fmt_double(r.mean_sqrt_pehe) << ',' << fmt_double(r.sd_sqrt_pehe) << ',' << r.n_reps << '\n';
}

// ---- config parsing ------------------------------------------------------

namespace {

struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw config_error("cannot open config '" + path + "'");
        IniFile ini;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            // strip comments and whitespace
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw config_error(path + ":" + std::to_string(lineno) + ": bad section header");
                section = line.substr(1, line.size() - 2);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
            ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return ini;
    }

    const std::string* find(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }
};

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw config_error("bad numeric value '" + s + "' for " + what);
    }
}

Vec to_list(const std::string& s, const std::string& what) {
    Vec out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(item, what));
    if (out.empty()) throw config_error("empty list for " + what);
    return out;
}

void fill_dgp(DgpConfig& cfg, const IniFile& ini, const std::string& section) {
    if (const auto* v = ini.find(section, "scenario")) {
        auto sc = scenario_from_name(*v);
        if (!sc) throw config_error("unknown scenario '" + *v + "'");
        cfg.scenario = *sc;
    }
    if (const auto* v = ini.find(section, "d")) cfg.d = static_cast<std::size_t>(to_double(*v, "d"));
    if (const auto* v = ini.find(section, "d_phi")) cfg.d_phi = static_cast<std::size_t>(to_double(*v, "d_phi"));
    if (const auto* v = ini.find(section, "n_conf")) cfg.n_conf = static_cast<std::size_t>(to_double(*v, "n_conf"));
    if (const auto* v = ini.find(section, "n_unc")) cfg.n_unc = static_cast<std::size_t>(to_double(*v, "n_unc"));
    if (const auto* v = ini.find(section, "sigma_u")) cfg.sigma_u = to_double(*v, "sigma_u");
    if (const auto* v = ini.find(section, "sigma_eps")) cfg.sigma_eps = to_double(*v, "sigma_eps");
    if (const auto* v = ini.find(section, "beta")) cfg.beta = to_double(*v, "beta");
    if (const auto* v = ini.find(section, "beta_phi")) cfg.beta_phi = to_double(*v, "beta_phi");
    if (const auto* v = ini.find(section, "a")) cfg.cube_a = to_double(*v, "a");
    if (const auto* v = ini.find(section, "seed")) cfg.seed = static_cast<std::uint64_t>(to_double(*v, "seed"));
}

}  // namespace

DgpConfig load_dgp_config(const std::string& path) {
    const IniFile ini = IniFile::parse(path);
    DgpConfig cfg;
    fill_dgp(cfg, ini, "scenario");
    cfg.validate();
    return cfg;
}

ExperimentSpec load_experiment_config(const std::string& path) {
    const IniFile ini = IniFile::parse(path);
    ExperimentSpec spec;
    fill_dgp(spec.base, ini, "scenario");
    if (const auto* v = ini.find("scenario", "delta_target")) spec.delta_target = to_double(*v, "delta_target");

    if (auto s = ini.sections.find("sweep"); s != ini.sections.end())
        for (const auto& [key, value] : s->second) spec.sweep.emplace_back(key, to_list(value, "sweep." + key));

    if (const auto* v = ini.find("run", "estimators")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            if (b != std::string::npos) spec.estimators.push_back(item.substr(b, e - b + 1));
        }
    }
    if (const auto* v = ini.find("run", "reps")) spec.reps = static_cast<int>(to_double(*v, "reps"));
    if (const auto* v = ini.find("run", "seed")) spec.seed = static_cast<std::uint64_t>(to_double(*v, "seed"));
    if (const auto* v = ini.find("run", "out_dir")) spec.out_dir = *v;
    if (const auto* v = ini.find("run", "parallelism")) spec.parallelism = static_cast<int>(to_double(*v, "parallelism"));
    if (const auto* v = ini.find("run", "timing")) spec.timing = (*v == "on" || *v == "true" || *v == "1");
    if (const auto* v = ini.find("run", "test_rows")) spec.test_rows = static_cast<std::size_t>(to_double(*v, "test_rows"));

    if (const auto* v = ini.find("estimator", "avg_lambda")) spec.opts.avg_lambda = to_double(*v, "avg_lambda");
    if (const auto* v = ini.find("estimator", "weight_Lambda")) spec.opts.weight_lambda_cap = to_double(*v, "weight_Lambda");
    if (const auto* v = ini.find("estimator", "kallus_propensity")) {
        if (*v == "logistic") {
            spec.opts.kallus_propensity.known = false;
        } else if (v->rfind("known:", 0) == 0) {
            spec.opts.kallus_propensity.known = true;
            spec.opts.kallus_propensity.e = to_double(v->substr(6), "kallus_propensity");
        } else {
            throw config_error("kallus_propensity must be 'logistic' or 'known:<e>'");
        }
    }
    if (const auto* v = ini.find("estimator", "kallus_ridge_scale"))
        spec.opts.kallus_ridge_scale = to_double(*v, "kallus_ridge_scale");

    spec.arch.d_phi = spec.base.d_phi;  // fitted representation width follows the scenario unless overridden
    if (const auto* v = ini.find("arch", "d_phi")) spec.arch.d_phi = static_cast<std::size_t>(to_double(*v, "arch.d_phi"));
    if (const auto* v = ini.find("arch", "phi_hidden")) {
        spec.arch.phi_hidden.clear();
        for (double h : to_list(*v, "phi_hidden")) spec.arch.phi_hidden.push_back(static_cast<std::size_t>(h));
    }
    if (const auto* v = ini.find("arch", "adversary_hidden")) {
        spec.arch.adversary_hidden.clear();
        for (double h : to_list(*v, "adversary_hidden")) spec.arch.adversary_hidden.push_back(static_cast<std::size_t>(h));
    }

    if (const auto* v = ini.find("train", "epochs")) spec.train.epochs = static_cast<std::size_t>(to_double(*v, "epochs"));
    if (const auto* v = ini.find("train", "target_steps"))
        spec.train.target_steps = static_cast<std::size_t>(to_double(*v, "target_steps"));
    if (const auto* v = ini.find("train", "batch")) spec.train.batch = static_cast<std::size_t>(to_double(*v, "batch"));
    if (const auto* v = ini.find("train", "learning_rate")) spec.train.learning_rate = to_double(*v, "learning_rate");

    spec.validate();
    return spec;
}

}  // namespace cornet
