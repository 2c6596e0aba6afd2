#pragma once
// Model parameters for both simulation levels.
//
// h      lattice spacing / diffusion scale (also the per-step physical time unit
//        of the unscaled lattice update),
// gamma0 baseline lateral diffusion rate,
// gamma1 rate boost for stepping aside "to the right" of an oncoming walker,
// gamma2 same "to the left",
// alpha  cohesion boost from a same-species walker two cells ahead.

#include <string>
#include <vector>

namespace laneform {

struct ModelParams {
    double h = 0.1;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double alpha = 0.0;

    // Names every violated bound; empty result means valid.
    std::vector<std::string> violations() const;
    // Throws ConfigError listing all violations.
    void validate() const;

    // Largest uniform rate scale lambda in (0,1] such that the worst-case total
    // jump probability per site stays <= 1:
    //   lambda * ((1+alpha) + 2*(gamma0 + max(gamma1,gamma2))) <= 1.
    // Pure time rescaling; one scaled step advances physical time by lambda*h.
    double rate_scale() const;
};

}  // namespace laneform
