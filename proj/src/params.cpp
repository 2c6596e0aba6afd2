#include "laneform/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laneform/common.hpp"

namespace laneform {

std::vector<std::string> ModelParams::violations() const {
    std::vector<std::string> out;
    auto bad = [&](bool cond, const std::string& msg) {
        if (cond) out.push_back(msg);
    };
    bad(!(h > 0.0) || !std::isfinite(h), "h must be finite and > 0 (got " + fmt17(h) + ")");
    bad(!(gamma0 >= 0.0 && gamma0 <= 1.0),
        "gamma0 must lie in [0,1] (got " + fmt17(gamma0) + ")");
    bad(!(gamma1 >= 0.0 && gamma1 <= 1.0),
        "gamma1 must lie in [0,1] (got " + fmt17(gamma1) + ")");
    bad(!(gamma2 >= 0.0 && gamma2 <= 1.0),
        "gamma2 must lie in [0,1] (got " + fmt17(gamma2) + ")");
    bad(!(alpha >= 0.0 && alpha <= 0.5),
        "alpha must lie in [0,1/2] (got " + fmt17(alpha) + ")");
    return out;
}

void ModelParams::validate() const {
    auto v = violations();
    if (v.empty()) return;
    std::ostringstream oss;
    oss << "invalid model parameters:";
    for (const auto& m : v) oss << "\n  - " << m;
    throw ConfigError(oss.str());
}

double ModelParams::rate_scale() const {
    // Worst-case per-site jump probability sum: forward (1+alpha) plus two lateral
    // channels (gamma0 + max(gamma1,gamma2)) each, all with vacancy factor <= 1.
    const double worst = (1.0 + alpha) + 2.0 * (gamma0 + std::max(gamma1, gamma2));
    return std::min(1.0, 1.0 / worst);
}

}  // namespace laneform
