#include <destrike/imaging.hpp>
#include <destrike/loss.hpp>
#include <destrike/models.hpp>
#include <destrike/nn/layers.hpp>
#include <destrike/optimizer.hpp>
#include <destrike/rng.hpp>
#include <destrike/training.hpp>

#include <benchmark/benchmark.h>

using namespace destrike;

namespace {

nn::Tensor<float> random_tensor(nn::Shape shape, std::uint64_t seed) {
    Rng rng(seed);
    nn::Tensor<float> t(shape);
    for (float& v : t.values()) v = static_cast<float>(rng.uniform());
    return t;
}

GrayImage random_frame(int height, int width, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img(height, width, Polarity::display);
    for (float& p : img.pixels()) p = static_cast<float>(rng.uniform());
    return img;
}

void BM_Conv3x3Forward(benchmark::State& state) {
    const int channels = static_cast<int>(state.range(0));
    nn::Conv2d<float> conv(channels, channels, 3, 1, 1);
    Rng rng(1);
    conv.initialize(rng);
    const auto x = random_tensor({1, channels, 64, 256}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, nn::Mode::eval));
}
BENCHMARK(BM_Conv3x3Forward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Conv3x3Backward(benchmark::State& state) {
    const int channels = static_cast<int>(state.range(0));
    nn::Conv2d<float> conv(channels, channels, 3, 1, 1);
    Rng rng(1);
    conv.initialize(rng);
    const auto x = random_tensor({1, channels, 64, 256}, 2);
    const auto g = random_tensor({1, channels, 64, 256}, 3);
    for (auto _ : state) {
        conv.forward(x, nn::Mode::train);
        benchmark::DoNotOptimize(conv.backward(g));
    }
}
BENCHMARK(BM_Conv3x3Backward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
    const auto arch = static_cast<ArchName>(state.range(0));
    Model model(reference_config(arch), 0);
    const auto x = random_tensor(model.input_shape(1), 4);
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, nn::Mode::eval));
    state.SetLabel(std::string(to_string(arch)));
}
BENCHMARK(BM_ModelForward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_TrainStep(benchmark::State& state) {
    const auto arch = static_cast<ArchName>(state.range(0));
    Model model(reference_config(arch), 0);
    Adam<float> opt(model.parameters(), AdamConfig{});
    const auto x = random_tensor(model.input_shape(4), 5);
    auto t = random_tensor(model.input_shape(4), 6);
    for (float& v : t.values()) v = v > 0.8f ? 1.0f : 0.0f;
    for (auto _ : state) {
        model.zero_grad();
        const auto z = model.logits(x, nn::Mode::train);
        model.backward(bce_logit_gradient(z, t));
        opt.step();
    }
    state.SetLabel(std::string(to_string(arch)));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Preprocess(benchmark::State& state) {
    const GrayImage img = invert(random_frame(90, 260, 7));
    for (auto _ : state) benchmark::DoNotOptimize(preprocess(img));
}
BENCHMARK(BM_Preprocess)->Unit(benchmark::kMicrosecond);

void BM_OtsuBinarize(benchmark::State& state) {
    const GrayImage img = random_frame(128, 512, 8);
    for (auto _ : state) benchmark::DoNotOptimize(otsu_binarize(img));
}
BENCHMARK(BM_OtsuBinarize)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
