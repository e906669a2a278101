#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace drmime {

struct GradCheckReport {
    std::string name;
    double max_rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// rel = |a - f| / max(|a|, |f|, 1e-5).
double gradcheck_rel_err(double analytic, double fd);

// Central-difference check of every tape primitive plus the critic MLP,
// the matrix exponential (tighter tolerance, larger step) and a DV-bound
// composite. Inputs are drawn from the seed with margins that keep the
// difference quotient away from relu/max kinks.
std::vector<GradCheckReport> run_gradcheck(std::uint64_t seed);

} // namespace drmime
