#pragma once

#include <map>
#include <string>
#include <vector>

#include "lsw/profile.hpp"

namespace lsw {

struct FamilyInfo {
    std::string id;
    std::string params;  // "name=default" pairs, comma separated
    std::string summary;
};

const std::vector<FamilyInfo>& family_catalog();

// Tail mass h(x) = [1 - (1-b)x]^{1/(1-b)}, e^{-x}, or [1 + (b-1)x]^{-1/(b-1)};
// w = -h' with h(0) = 1 and w(0) = 1. beta = 0 gives the indicator of [0, 1].
SurvivalProfile constant_beta_profile(double beta, const GridOptions& grid = {});
SurvivalProfile exponential_profile(const GridOptions& grid = {});
SurvivalProfile indicator_profile();
// h = e^{-x}(1 + eps cos x), rescaled to unit mass. Needs |eps| < 1/2.
SurvivalProfile example1_profile(double eps = 0.3, const GridOptions& grid = {});
double example1_beta(double eps, double x);
// h = d^{p+1}(1 + eps d^2 cos(1/d)), d = 1 - x, rescaled to unit mass. The grid
// resolves cos(1/d) down to d = end_gap (default 1e-3).
SurvivalProfile example2_profile(double eps = 0.3, double p = 2.0, GridOptions grid = {});
// Cluster density K/(1+x)^{2+eps}; w = eps (1+x)^{-1-eps} has unit mass.
SurvivalProfile power_tail_profile(double eps, const GridOptions& grid = {});

// Builds a profile by family id. Unknown ids or parameters throw DomainError.
SurvivalProfile make_family(const std::string& id, const std::map<std::string, double>& params,
                            const GridOptions& grid = {});

}  // namespace lsw
