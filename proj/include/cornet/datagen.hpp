#pragma once
#include <array>
#include <cstdint>
#include <optional>

#include "cornet/dataset.hpp"
#include "cornet/net.hpp"

namespace cornet {

enum class Scenario { shared_rep, no_shared_rep, overlap_cube, matched_gaussian };

std::string scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(const std::string& name);

struct DgpConfig {
    Scenario scenario = Scenario::shared_rep;
    std::size_t d = 10;
    std::size_t d_phi = 8;
    std::size_t n_conf = 1000;
    std::size_t n_unc = 50;
    double sigma_u = 1.0;    // randomized covariate scale (shared_rep / matched_gaussian)
    double beta = 0.0;       // L1 norm of each per-arm bias vector
    double sigma_eps = 0.5;  // outcome noise sd
    double beta_phi = 0.0;   // last-layer perturbation norm (no_shared_rep)
    double cube_a = 3.0;     // hypercube half-width (overlap_cube / matched_gaussian)
    std::uint64_t seed = 0;
    std::vector<std::size_t> phi_hidden = {32, 32};  // architecture of the generating network

    void validate() const;
};

/// The generating process: representation, per-arm confounded and
/// unconfounded heads, and noise scale. True CATE is
/// tau(x) = phi_star(x) . (w_u[1] - w_u[0]).
struct SyntheticTruth {
    LayerStack phi_star;
    std::array<Vec, 2> w_u;  // indexed by arm
    std::array<Vec, 2> w_c;
    double noise_sd = 0.5;

    double tau(std::span<const double> x) const;
    Vec tau_rows(const Matrix& x) const;
};

/// Extra pieces returned by the no-shared-representation scenario: the
/// confounded-side representation and the exact last-layer perturbation.
struct NoSharedRepDraw {
    CombinedData data;
    SyntheticTruth truth;  // phi_star here is the randomized-side network
    LayerStack phi_conf;
    Matrix perturbation;
};

/// sigma_u matched to Uniform([-a,a]^d) so each Gaussian coordinate lands in
/// [-a,a] with probability 0.9973 (the 3-sigma convention).
double matched_sigma(double a);

/// Draw the generating networks and heads only. Consumes the rng identically
/// for every beta, so a same-seeded rng reproduces the truth after
/// calibrate_beta has picked beta.
SyntheticTruth draw_truth(const DgpConfig& cfg, Rng& rng);

std::pair<CombinedData, SyntheticTruth> sample_shared_rep(const DgpConfig& cfg, Rng& rng);
std::pair<CombinedData, SyntheticTruth> sample_overlap_cube(const DgpConfig& cfg, Rng& rng);
NoSharedRepDraw sample_no_shared_rep(const DgpConfig& cfg, Rng& rng);
/// Dispatch on cfg.scenario (no_shared_rep yields the truth's view only).
std::pair<CombinedData, SyntheticTruth> sample_scenario(const DgpConfig& cfg, Rng& rng);

/// Monte-Carlo estimate of the confounding bias
/// Delta = E[(phi_star(X) . (delta_1 - delta_0))^2] over X ~ N(0, I_d).
double estimate_delta(const SyntheticTruth& truth, std::size_t draws, Rng& rng);

/// Find beta so the Monte-Carlo Delta for (cfg, rng's seed) hits
/// target_delta, by bisection with the delta direction fixed. Call
/// sample_* afterwards with a fresh rng seeded identically.
double calibrate_beta(const DgpConfig& cfg, double target_delta, Rng& rng, std::size_t draws = 10000);

/// Manufacture a confounded observational / small randomized pair from an
/// unconfounded dataset: randomized rows are picked with probability skewed
/// by select_col, then the observational set keeps controls with unusually
/// low outcomes and treated with unusually high outcomes (threshold offset
/// c in sd units).
struct ConfoundSplit {
    CombinedData data;
    std::vector<std::size_t> rand_rows;  // row indices into the source dataset
    std::vector<std::size_t> obs_rows;
};

ConfoundSplit confound_split(const TreatmentDataset& data, std::size_t select_col, std::size_t rand_size,
                             double c, Rng& rng);

}  // namespace cornet
