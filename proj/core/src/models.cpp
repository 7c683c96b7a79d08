#include <destrike/models.hpp>

#include <destrike/errors.hpp>

#include <array>
#include <string>

namespace destrike {

namespace {

constexpr std::array<std::string_view, 4> kArchStrings = {"simple_cnn", "shallow", "unet", "generator"};

template <typename T>
using Seq = nn::Sequential<T>;

template <typename T>
void add_conv(Seq<T>& s, int cin, int cout, int k, int stride, bool norm, bool relu, const ModelConfig& c) {
    s.add(std::make_unique<nn::Conv2d<T>>(cin, cout, k, stride, k / 2));
    if (norm) s.add(std::make_unique<nn::BatchNorm2d<T>>(cout, c.bn_momentum, c.bn_eps));
    if (relu) s.add(std::make_unique<nn::ReLU<T>>());
}

// Stride-2 transposed conv that exactly doubles the extent.
template <typename T>
void add_up(Seq<T>& s, int cin, int cout, int k, bool norm, bool relu, const ModelConfig& c) {
    s.add(std::make_unique<nn::ConvTranspose2d<T>>(cin, cout, k, 2, k / 2, 1));
    if (norm) s.add(std::make_unique<nn::BatchNorm2d<T>>(cout, c.bn_momentum, c.bn_eps));
    if (relu) s.add(std::make_unique<nn::ReLU<T>>());
}

template <typename T>
std::unique_ptr<nn::Layer<T>> build_simple_cnn(const ModelConfig& c) {
    auto s = std::make_unique<Seq<T>>();
    const int k = c.outer_kernel;
    int cin = 1;
    for (int width : c.channels) {
        add_conv(*s, cin, width, k, 2, c.batch_norm, true, c);
        cin = width;
    }
    for (std::size_t i = c.channels.size(); i-- > 0;) {
        const int cout = i == 0 ? 1 : c.channels[i - 1];
        const bool last = i == 0;
        add_up(*s, cin, cout, k, c.batch_norm && !last, !last, c);
        cin = cout;
    }
    return s;
}

template <typename T>
std::unique_ptr<nn::Layer<T>> build_shallow(const ModelConfig& c) {
    auto s = std::make_unique<Seq<T>>();
    const int k = c.outer_kernel;
    const int c0 = c.channels.at(0);
    const int c1 = c.channels.at(1);
    add_conv(*s, 1, c0, k, 2, c.batch_norm, true, c);
    add_conv(*s, c0, c1, 3, 2, false, true, c);
    add_up(*s, c1, c0, 3, c.batch_norm, true, c);
    add_up(*s, c0, 1, k, false, false, c);
    return s;
}

template <typename T>
std::unique_ptr<nn::Layer<T>> build_generator(const ModelConfig& c) {
    auto s = std::make_unique<Seq<T>>();
    const int k = c.outer_kernel;
    const int c0 = c.channels.at(0);
    const int c1 = c.channels.at(1);
    const int c2 = c.channels.at(2);
    add_conv(*s, 1, c0, k, 1, c.batch_norm, true, c);
    add_conv(*s, c0, c1, 3, 2, c.batch_norm, true, c);
    add_conv(*s, c1, c2, 3, 2, c.batch_norm, true, c);
    auto dense = std::make_unique<nn::DenseBlock<T>>(c2, c.growth_rate, c.dense_layers, true,
                                                     c.bn_momentum, c.bn_eps);
    const int dense_out = dense->out_channels();
    s->add(std::move(dense));
    add_up(*s, dense_out, c1, 3, c.batch_norm, true, c);
    add_up(*s, c1, c0, 3, c.batch_norm, true, c);
    add_conv(*s, c0, 1, k, 1, false, false, c);
    return s;
}

template <typename T>
std::unique_ptr<nn::Layer<T>> build_body(const ModelConfig& c) {
    switch (c.arch) {
        case ArchName::simple_cnn:
            return build_simple_cnn<T>(c);
        case ArchName::shallow:
            return build_shallow<T>(c);
        case ArchName::generator:
            return build_generator<T>(c);
        case ArchName::unet:
            return std::make_unique<nn::DenseUNet<T>>(c.channels.at(0), c.growth_rate, c.dense_layers,
                                                      c.bn_momentum, c.bn_eps);
    }
    throw ValidationError("unknown architecture");
}

}  // namespace

std::string_view to_string(ArchName arch) noexcept { return kArchStrings[static_cast<std::size_t>(arch)]; }

std::optional<ArchName> parse_arch(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kArchStrings.size(); ++i) {
        if (kArchStrings[i] == name) return kArchNames[i];
    }
    return std::nullopt;
}

ModelConfig reference_config(ArchName arch) {
    ModelConfig c;
    c.arch = arch;
    switch (arch) {
        case ArchName::simple_cnn:
            c.channels = {16, 32, 32};
            c.outer_kernel = 3;
            c.batch_norm = false;
            break;
        case ArchName::shallow:
            c.channels = {64, 128};
            c.outer_kernel = 7;
            break;
        case ArchName::generator:
            c.channels = {64, 128, 128};
            c.outer_kernel = 7;
            c.growth_rate = 64;
            c.dense_layers = 4;
            break;
        case ArchName::unet:
            c.channels = {24};
            c.outer_kernel = 3;
            c.growth_rate = 12;
            c.dense_layers = 4;
            c.head = HeadActivation::identity;
            break;
    }
    return c;
}

void validate(const ModelConfig& c) {
    const auto fail = [&](const std::string& why) {
        throw ValidationError(std::string(to_string(c.arch)) + " config: " + why);
    };
    if (c.input_height < 1 || c.input_width < 1) fail("input size must be positive");
    for (int w : c.channels) {
        if (w < 1) fail("channel widths must be positive");
    }
    if (c.outer_kernel < 1 || c.outer_kernel % 2 == 0) fail("outer_kernel must be odd and positive");
    const bool wants_identity = c.arch == ArchName::unet;
    if ((c.head == HeadActivation::identity) != wants_identity) {
        fail(wants_identity ? "unet uses an identity head" : "head activation must be sigmoid");
    }
    if (!(c.bn_momentum > 0.0 && c.bn_momentum <= 1.0) || !(c.bn_eps > 0.0)) fail("bad batch-norm constants");
    switch (c.arch) {
        case ArchName::simple_cnn:
            if (c.channels.empty()) fail("needs at least one down layer");
            break;
        case ArchName::shallow:
            if (c.channels.size() != 2) fail("needs exactly 2 channel widths");
            break;
        case ArchName::generator:
            if (c.channels.size() != 3) fail("needs exactly 3 channel widths");
            if (c.growth_rate < 1 || c.dense_layers < 1) fail("needs a dense bottleneck");
            break;
        case ArchName::unet:
            if (c.channels.size() != 1) fail("needs exactly 1 stem width");
            if (c.growth_rate < 1 || c.dense_layers < 1) fail("needs dense blocks");
            break;
    }
}

template <typename T>
Network<T>::Network(ModelConfig config, std::uint64_t init_seed)
    : config_(std::move(config)), init_seed_(init_seed) {
    validate(config_);
    body_ = build_body<T>(config_);
    body_->set_name("");
    const nn::Shape in = input_shape(1);
    const nn::Shape out = body_->output_shape(in);
    if (!(out == in)) {
        throw ShapeError(std::string(to_string(config_.arch)) + ": layer chain maps " + in.to_string() +
                         " to " + out.to_string());
    }
    Rng rng(init_seed_);
    body_->initialize(rng);
}

template <typename T>
void Network<T>::check_batch(const nn::Tensor<T>& batch) const {
    const nn::Shape& s = batch.shape();
    if (s.n < 1 || !(s == input_shape(s.n))) {
        throw ShapeError("expected batch of " + input_shape(s.n).to_string() + ", got " + s.to_string());
    }
}

template <typename T>
nn::Tensor<T> Network<T>::logits(const nn::Tensor<T>& batch, nn::Mode mode) {
    check_batch(batch);
    return body_->forward(batch, mode);
}

template <typename T>
nn::Tensor<T> Network<T>::forward(const nn::Tensor<T>& batch, nn::Mode mode) {
    nn::Tensor<T> y = logits(batch, mode);
    if (config_.head == HeadActivation::sigmoid) {
        for (T& v : y.values()) v = sigmoid(v);
    }
    return y;
}

template <typename T>
void Network<T>::backward(const nn::Tensor<T>& grad_logits) {
    body_->backward(grad_logits);
}

template <typename T>
std::vector<nn::Parameter<T>*> Network<T>::parameters() {
    std::vector<nn::Parameter<T>*> out;
    body_->collect_parameters(out);
    return out;
}

template <typename T>
std::vector<nn::Parameter<T>*> Network<T>::buffers() {
    std::vector<nn::Parameter<T>*> out;
    body_->collect_buffers(out);
    return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->value.size();
    return n;
}

template <typename T>
void Network<T>::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

template class Network<float>;
template class Network<double>;

nn::Tensor<float> predict_probabilities(Model& model, const nn::Tensor<float>& batch) {
    nn::Tensor<float> y = model.forward(batch, nn::Mode::eval);
    if (model.config().head == HeadActivation::identity) {
        for (float& v : y.values()) v = sigmoid(v);
    }
    return y;
}

}  // namespace destrike
