#include <destrike/optimizer.hpp>

#include <cmath>

namespace destrike {

template <typename T>
Adam<T>::Adam(std::vector<nn::Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto* p : params_) {
        m_.emplace_back(p->value.size(), T(0));
        v_.emplace_back(p->value.size(), T(0));
    }
}

template <typename T>
void Adam<T>::step() {
    ++steps_;
    const double t = static_cast<double>(steps_);
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    const T step_size = static_cast<T>(config_.learning_rate / (1.0 - std::pow(config_.beta1, t)));
    const T root_c2 = static_cast<T>(std::sqrt(1.0 - std::pow(config_.beta2, t)));
    const T eps = static_cast<T>(config_.epsilon);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = *params_[k];
        T* m = m_[k].data();
        T* v = v_[k].data();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const T g = p.grad[i];
            m[i] = b1 * m[i] + (T(1) - b1) * g;
            v[i] = b2 * v[i] + (T(1) - b2) * g * g;
            p.value[i] -= step_size * m[i] / (std::sqrt(v[i]) / root_c2 + eps);
        }
    }
}

template <typename T>
void Adam<T>::zero_grad() {
    for (auto* p : params_) p->zero_grad();
}

template class Adam<float>;
template class Adam<double>;

}  // namespace destrike
