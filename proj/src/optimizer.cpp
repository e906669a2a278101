#include "drmime/optimizer.hpp"

#include <cmath>

#include "drmime/errors.hpp"

namespace drmime {

void AdamAms::step(const std::vector<ad::Tensor*>& params,
                   const std::vector<const ad::Tensor*>& grads, double rate) {
    if (params.size() != grads.size())
        throw InvalidArgument("AdamAms::step: params/grads count mismatch");
    if (m_.empty()) {
        for (const ad::Tensor* p : params) {
            m_.emplace_back(ad::Tensor::zeros(p->shape()));
            u_.emplace_back(ad::Tensor::zeros(p->shape()));
            umax_.emplace_back(ad::Tensor::zeros(p->shape()));
        }
    }
    if (m_.size() != params.size())
        throw InvalidArgument("AdamAms::step: parameter group changed size");

    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        ad::Tensor& p = *params[i];
        const ad::Tensor& g = *grads[i];
        if (!p.same_shape(g)) throw InvalidArgument("AdamAms::step: shape mismatch");
        if (!g.all_finite()) throw NumericalError("AdamAms::step: non-finite gradient");
        ad::Tensor& m = m_[i];
        ad::Tensor& u = u_[i];
        ad::Tensor& umax = umax_[i];
        for (std::size_t k = 0; k < p.numel(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            u[k] = cfg_.beta2 * u[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
            if (u[k] > umax[k]) umax[k] = u[k];
            const double m_hat = m[k] / bc1;
            const double denom = std::sqrt(umax[k] / bc2) + cfg_.eps;
            p[k] += rate * m_hat / denom;
        }
    }
}

} // namespace drmime
