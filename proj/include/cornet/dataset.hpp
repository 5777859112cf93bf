#pragma once
#include <string>
#include <utility>
#include <vector>

#include "cornet/matrix.hpp"

namespace cornet {

/// Covariates, binary treatment, outcome. Row i is (x.row(i), t[i], y[i]).
struct TreatmentDataset {
    Matrix x;
    std::vector<int> t;  // entries in {0, 1}
    Vec y;

    std::size_t n() const { return x.rows; }
    std::size_t dim() const { return x.cols; }
    void validate() const;
    std::size_t arm_count(int arm) const;
    /// Rows with t == arm, in original order.
    std::vector<std::size_t> arm_rows(int arm) const;
};

/// Paired observational (possibly confounded, large) and randomized
/// (unconfounded, small) datasets over the same covariate space.
struct CombinedData {
    TreatmentDataset obs;
    TreatmentDataset rand;

    void validate() const;
};

// CSV format: header "x1,...,xd,t,y", UTF-8, '.' decimal point, '\n' rows.
TreatmentDataset load_csv(const std::string& path);
void write_csv(const TreatmentDataset& ds, const std::string& path);

/// Sidecar provenance file, flat key=value lines.
void write_meta(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_meta(const std::string& path);

/// Covariates-plus-reference-CATE table used by the eval workflow.
/// Header "x1,...,xd,tau".
void write_tau_csv(const Matrix& x, const Vec& tau, const std::string& path);
void load_tau_csv(const std::string& path, Matrix& x, Vec& tau);

}  // namespace cornet
