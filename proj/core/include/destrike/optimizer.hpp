#pragma once

#include <destrike/nn/layers.hpp>

#include <cstdint>
#include <vector>

namespace destrike {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adam with bias correction, no weight decay.
template <typename T>
class Adam {
public:
    Adam(std::vector<nn::Parameter<T>*> params, AdamConfig config);

    void step();
    void zero_grad();
    std::int64_t steps() const noexcept { return steps_; }
    const AdamConfig& config() const noexcept { return config_; }

private:
    std::vector<nn::Parameter<T>*> params_;
    AdamConfig config_;
    std::vector<std::vector<T>> m_;
    std::vector<std::vector<T>> v_;
    std::int64_t steps_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace destrike
