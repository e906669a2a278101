#pragma once

#include <vector>

#include "drmime/tensor.hpp"

namespace drmime {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with the AMSGrad max rule, ascent direction (params += step).
// One instance owns the moments of one parameter group; call step() once
// per iteration for that group.
class AdamAms {
public:
    explicit AdamAms(AdamConfig cfg = {}) : cfg_(cfg) {}

    // params[i] += rate * m_hat / (sqrt(umax_hat) + eps), with both moments
    // bias-corrected. Moment buffers are allocated on the first call.
    void step(const std::vector<ad::Tensor*>& params, const std::vector<const ad::Tensor*>& grads,
              double rate);

    long step_count() const { return t_; }
    const std::vector<ad::Tensor>& max_second_moment() const { return umax_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<ad::Tensor> m_, u_, umax_;
};

} // namespace drmime
