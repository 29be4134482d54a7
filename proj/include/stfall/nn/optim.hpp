#pragma once

#include <cmath>
#include <vector>

#include "stfall/nn/layers.hpp"

namespace stfall::nn {

template <typename S>
class Optimizer {
  public:
    explicit Optimizer(std::vector<Param<S>*> params) : params_(std::move(params)) {}
    virtual ~Optimizer() = default;
    virtual void step() = 0;

  protected:
    std::vector<Param<S>*> params_;
};

template <typename S>
class Sgd : public Optimizer<S> {
  public:
    Sgd(std::vector<Param<S>*> params, S lr) : Optimizer<S>(std::move(params)), lr_(lr) {}

    void step() override {
        for (auto* p : this->params_)
            for (std::int64_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr_ * p->grad[i];
    }

  private:
    S lr_;
};

template <typename S>
class Adadelta : public Optimizer<S> {
  public:
    Adadelta(std::vector<Param<S>*> params, S lr = S(1), S rho = S(0.95), S eps = S(1e-6))
        : Optimizer<S>(std::move(params)), lr_(lr), rho_(rho), eps_(eps) {
        for (auto* p : this->params_) {
            acc_grad_.emplace_back(p->value.shape());
            acc_update_.emplace_back(p->value.shape());
        }
    }

    void step() override {
        for (std::size_t k = 0; k < this->params_.size(); ++k) {
            auto* p = this->params_[k];
            auto& eg = acc_grad_[k];
            auto& eu = acc_update_[k];
            for (std::int64_t i = 0; i < p->value.size(); ++i) {
                const S g = p->grad[i];
                eg[i] = rho_ * eg[i] + (S(1) - rho_) * g * g;
                const S upd = std::sqrt(eu[i] + eps_) / std::sqrt(eg[i] + eps_) * g;
                eu[i] = rho_ * eu[i] + (S(1) - rho_) * upd * upd;
                p->value[i] -= lr_ * upd;
            }
        }
    }

  private:
    S lr_, rho_, eps_;
    std::vector<Tensor<S>> acc_grad_, acc_update_;
};

}  // namespace stfall::nn
