#pragma once
#include <string>

#include "cornet/baselines.hpp"
#include "cornet/cornet.hpp"

namespace cornet {

void save_model(const CornetModel& m, const std::string& path);
void save_model(const TwoHeadModel& m, const std::string& path);
void save_model(const KallusModel& m, const std::string& path);
void save_avg_model(const TwoHeadModel& m_unc, const TwoHeadModel& m_conf, double lam, const std::string& path);

/// Any serialized model reloaded as a CATE predictor.
struct LoadedModel {
    std::string kind;
    std::size_t input_dim = 0;
    CateFn cate;
};

LoadedModel load_model(const std::string& path);

}  // namespace cornet
