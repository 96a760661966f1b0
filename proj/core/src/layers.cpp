#include "urbf/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "urbf/optim.hpp"

namespace urbf {

double gaussian_kernel(double u, double v) {
    if (v < kSigmaMin) {
        throw ContractError("gaussian_kernel: spread " + std::to_string(v) +
                            " below floor " + std::to_string(kSigmaMin));
    }
    return std::exp(-(u * u) / (2.0 * v * v));
}

std::vector<double> init_urbf_centers(double lo, double hi, std::size_t k) {
    if (k < 2) throw ContractError("init_urbf_centers: need K >= 2");
    if (!(lo < hi)) throw ContractError("init_urbf_centers: degenerate range");
    std::vector<double> centers(k);
    const double gap = (hi - lo) / static_cast<double>(k - 1);
    for (std::size_t i = 0; i < k; ++i) centers[i] = lo + static_cast<double>(i) * gap;
    centers.front() = lo;
    centers.back() = hi;
    return centers;
}

AffineLayer AffineLayer::create(std::size_t in, std::size_t out, Activation act,
                                std::mt19937_64& rng) {
    if (in == 0 || out == 0) throw ContractError("AffineLayer: zero dimension");
    AffineLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights = make_tensor({in, out}, 0.0, true);
    for (double& w : layer.weights->values()) w = dist(rng);
    layer.bias = make_tensor({out}, 0.0, true);
    layer.activation = act;
    return layer;
}

NodeId AffineLayer::forward(Graph& g, NodeId x) const {
    const Tensor& xt = g.value(x);
    if (xt.rank() != 2 || xt.cols() != in_features()) {
        throw ContractError("AffineLayer: input " + shape_to_string(xt.shape()) +
                            " does not match in_features " + std::to_string(in_features()));
    }
    NodeId w = g.leaf(weights);
    NodeId b = g.leaf(bias);
    NodeId y = g.add(g.matmul(x, w), g.broadcast_to(b, xt.rows()));
    if (activation == Activation::Relu) y = g.relu(y);
    return y;
}

UrbfLayer UrbfLayer::create(std::size_t input_dim, std::size_t kernels_per_input,
                            double range_lo, double range_hi, bool spreads_learnable) {
    if (input_dim == 0) throw ContractError("UrbfLayer: zero input dimension");
    const std::vector<double> row = init_urbf_centers(range_lo, range_hi, kernels_per_input);
    UrbfLayer layer;
    layer.input_dim = input_dim;
    layer.kernels_per_input = kernels_per_input;
    layer.range_lo = range_lo;
    layer.range_hi = range_hi;
    layer.spreads_learnable = spreads_learnable;
    layer.centers = make_tensor({input_dim, kernels_per_input}, 0.0, true);
    for (std::size_t d = 0; d < input_dim; ++d) {
        for (std::size_t k = 0; k < kernels_per_input; ++k) {
            layer.centers->at(d, k) = row[k];
        }
    }
    // One inter-center spacing: neighbors overlap near half-height.
    const double sigma0 = (range_hi - range_lo) / static_cast<double>(kernels_per_input - 1);
    layer.spreads = make_tensor({input_dim, kernels_per_input}, sigma0, spreads_learnable);
    return layer;
}

NodeId UrbfLayer::forward(Graph& g, NodeId x) const {
    const Tensor& xt = g.value(x);
    if (xt.rank() != 2 || xt.cols() != input_dim) {
        throw ContractError("UrbfLayer: input " + shape_to_string(xt.shape()) +
                            " does not match input_dim " + std::to_string(input_dim));
    }
    return g.urbf(x, g.leaf(centers), g.leaf(spreads));
}

void UrbfLayer::clamp_spreads() {
    for (double& s : spreads->values()) s = std::max(s, kSigmaMin);
}

MrbfLayer MrbfLayer::create(std::size_t input_dim, std::size_t num_kernels,
                            std::size_t output_dim, double range_lo, double range_hi,
                            std::mt19937_64& rng) {
    if (input_dim == 0 || num_kernels == 0 || output_dim == 0) {
        throw ContractError("MrbfLayer: zero dimension");
    }
    MrbfLayer layer;
    layer.input_dim = input_dim;
    layer.num_kernels = num_kernels;
    layer.centers = make_tensor({num_kernels, input_dim}, 0.0, true);
    std::uniform_real_distribution<double> cdist(range_lo, range_hi);
    for (double& c : layer.centers->values()) c = cdist(rng);
    const double sigma0 =
        (range_hi - range_lo) / std::sqrt(2.0 * static_cast<double>(num_kernels));
    layer.spreads = make_tensor({num_kernels}, std::max(sigma0, kSigmaMin), true);
    const double bound = 1.0 / std::sqrt(static_cast<double>(num_kernels));
    std::uniform_real_distribution<double> wdist(-bound, bound);
    layer.weights = make_tensor({output_dim, num_kernels}, 0.0, true);
    for (double& w : layer.weights->values()) w = wdist(rng);
    return layer;
}

NodeId MrbfLayer::forward(Graph& g, NodeId x) const {
    const Tensor& xt = g.value(x);
    if (xt.rank() != 2 || xt.cols() != input_dim) {
        throw ContractError("MrbfLayer: input " + shape_to_string(xt.shape()) +
                            " does not match input_dim " + std::to_string(input_dim));
    }
    return g.mrbf(x, g.leaf(centers), g.leaf(spreads), g.leaf(weights));
}

void MrbfLayer::clamp_spreads() {
    for (double& s : spreads->values()) s = std::max(s, kSigmaMin);
}

NetworkSpec NetworkSpec::parse(const std::string& text) {
    NetworkSpec spec;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token.erase(std::remove_if(token.begin(), token.end(),
                                   [](unsigned char c) { return std::isspace(c); }),
                    token.end());
        if (token.empty()) continue;
        LayerDesc desc;
        std::string num = token;
        if (token.rfind("urbf:", 0) == 0) {
            desc.kind = LayerDesc::Kind::Urbf;
            num = token.substr(5);
        } else if (token.rfind("mrbf:", 0) == 0) {
            desc.kind = LayerDesc::Kind::Mrbf;
            num = token.substr(5);
        } else if (token.rfind("affine:", 0) == 0) {
            num = token.substr(7);
        }
        std::size_t pos = 0;
        long value = 0;
        try {
            value = std::stol(num, &pos);
        } catch (const std::exception&) {
            throw ContractError("NetworkSpec: bad layer token '" + token + "'");
        }
        if (pos != num.size() || value <= 0) {
            throw ContractError("NetworkSpec: bad layer token '" + token + "'");
        }
        desc.width = static_cast<std::size_t>(value);
        spec.hidden.push_back(desc);
    }
    if (spec.hidden.empty()) throw ContractError("NetworkSpec: empty spec '" + text + "'");
    return spec;
}

std::string NetworkSpec::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (i) os << ",";
        switch (hidden[i].kind) {
            case LayerDesc::Kind::Affine: break;
            case LayerDesc::Kind::Urbf: os << "urbf:"; break;
            case LayerDesc::Kind::Mrbf: os << "mrbf:"; break;
        }
        os << hidden[i].width;
    }
    return os.str();
}

Network Network::build(const NetworkSpec& spec, std::size_t input_dim,
                       std::size_t output_dim, const BuildOptions& opts) {
    if (input_dim == 0 || output_dim == 0) throw ContractError("Network: zero dimension");
    if (spec.hidden.empty()) throw ContractError("Network: empty spec");
    std::mt19937_64 rng(opts.seed);
    Network net;
    net.input_dim_ = input_dim;
    net.output_dim_ = output_dim;
    std::size_t width = input_dim;
    for (const LayerDesc& desc : spec.hidden) {
        switch (desc.kind) {
            case LayerDesc::Kind::Affine: {
                net.affine_.push_back(
                    AffineLayer::create(width, desc.width, Activation::Relu, rng));
                net.order_.push_back({desc.kind, net.affine_.size() - 1});
                width = desc.width;
                break;
            }
            case LayerDesc::Kind::Urbf: {
                net.urbf_.push_back(UrbfLayer::create(width, desc.width, opts.range_lo,
                                                      opts.range_hi, opts.spreads_learnable));
                net.order_.push_back({desc.kind, net.urbf_.size() - 1});
                width = net.urbf_.back().output_dim();
                break;
            }
            case LayerDesc::Kind::Mrbf: {
                net.mrbf_.push_back(MrbfLayer::create(width, desc.width, desc.width,
                                                      opts.range_lo, opts.range_hi, rng));
                net.order_.push_back({desc.kind, net.mrbf_.size() - 1});
                width = desc.width;
                break;
            }
        }
    }
    net.affine_.push_back(AffineLayer::create(width, output_dim, Activation::None, rng));
    net.order_.push_back({LayerDesc::Kind::Affine, net.affine_.size() - 1});
    return net;
}

NodeId Network::forward(Graph& g, NodeId x) const {
    const Tensor& xt = g.value(x);
    if (xt.rank() != 2 || xt.cols() != input_dim_) {
        throw ContractError("Network: input " + shape_to_string(xt.shape()) +
                            " does not match input_dim " + std::to_string(input_dim_));
    }
    NodeId h = x;
    for (const Slot& slot : order_) {
        switch (slot.kind) {
            case LayerDesc::Kind::Affine: h = affine_[slot.index].forward(g, h); break;
            case LayerDesc::Kind::Urbf: h = urbf_[slot.index].forward(g, h); break;
            case LayerDesc::Kind::Mrbf: h = mrbf_[slot.index].forward(g, h); break;
        }
    }
    return h;
}

std::vector<double> Network::predict(const std::vector<double>& input) const {
    if (input.size() != input_dim_) throw ContractError("Network::predict: bad input width");
    Graph g;
    NodeId x = g.leaf(Tensor::from({1, input_dim_}, input));
    NodeId y = forward(g, x);
    return g.value(y).values();
}

std::vector<TensorPtr> Network::parameters() const {
    std::vector<TensorPtr> params;
    for (const Slot& slot : order_) {
        switch (slot.kind) {
            case LayerDesc::Kind::Affine: {
                const AffineLayer& l = affine_[slot.index];
                params.push_back(l.weights);
                params.push_back(l.bias);
                break;
            }
            case LayerDesc::Kind::Urbf: {
                const UrbfLayer& l = urbf_[slot.index];
                params.push_back(l.centers);
                if (l.spreads_learnable) params.push_back(l.spreads);
                break;
            }
            case LayerDesc::Kind::Mrbf: {
                const MrbfLayer& l = mrbf_[slot.index];
                params.push_back(l.centers);
                params.push_back(l.spreads);
                params.push_back(l.weights);
                break;
            }
        }
    }
    return params;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const TensorPtr& p : parameters()) n += p->size();
    return n;
}

void Network::project_constraints() {
    for (UrbfLayer& l : urbf_) l.clamp_spreads();
    for (MrbfLayer& l : mrbf_) l.clamp_spreads();
}

namespace {
TensorPtr deep_copy(const TensorPtr& t) {
    return std::make_shared<Tensor>(*t);
}
}  // namespace

Network Network::clone() const {
    Network copy = *this;
    for (AffineLayer& l : copy.affine_) {
        l.weights = deep_copy(l.weights);
        l.bias = deep_copy(l.bias);
    }
    for (UrbfLayer& l : copy.urbf_) {
        l.centers = deep_copy(l.centers);
        l.spreads = deep_copy(l.spreads);
    }
    for (MrbfLayer& l : copy.mrbf_) {
        l.centers = deep_copy(l.centers);
        l.spreads = deep_copy(l.spreads);
        l.weights = deep_copy(l.weights);
    }
    return copy;
}

void Network::copy_parameters_from(const Network& other) {
    auto copy_values = [](const TensorPtr& dst, const TensorPtr& src) {
        if (dst->shape() != src->shape()) {
            throw ContractError("copy_parameters_from: shape mismatch");
        }
        dst->values() = src->values();
    };
    if (affine_.size() != other.affine_.size() || urbf_.size() != other.urbf_.size() ||
        mrbf_.size() != other.mrbf_.size()) {
        throw ContractError("copy_parameters_from: structure mismatch");
    }
    for (std::size_t i = 0; i < affine_.size(); ++i) {
        copy_values(affine_[i].weights, other.affine_[i].weights);
        copy_values(affine_[i].bias, other.affine_[i].bias);
    }
    for (std::size_t i = 0; i < urbf_.size(); ++i) {
        copy_values(urbf_[i].centers, other.urbf_[i].centers);
        copy_values(urbf_[i].spreads, other.urbf_[i].spreads);
    }
    for (std::size_t i = 0; i < mrbf_.size(); ++i) {
        copy_values(mrbf_[i].centers, other.mrbf_[i].centers);
        copy_values(mrbf_[i].spreads, other.mrbf_[i].spreads);
        copy_values(mrbf_[i].weights, other.mrbf_[i].weights);
    }
}

bool kernel_map_distinct(const UrbfLayer& layer, double u, double v) {
    for (std::size_t d = 0; d < layer.input_dim; ++d) {
        bool distinct = false;
        for (std::size_t k = 0; k < layer.kernels_per_input; ++k) {
            const double s = std::max(layer.spreads->at(d, k), kSigmaMin);
            const double hu = gaussian_kernel(u - layer.centers->at(d, k), s);
            const double hv = gaussian_kernel(v - layer.centers->at(d, k), s);
            if (std::abs(hu - hv) > 1e-12) {
                distinct = true;
                break;
            }
        }
        if (!distinct) return false;
    }
    return true;
}

bool check_injectivity(const UrbfLayer& layer, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(layer.range_lo, layer.range_hi);
    for (std::size_t i = 0; i < samples; ++i) {
        double u = dist(rng);
        double v = dist(rng);
        while (v == u) v = dist(rng);
        if (!kernel_map_distinct(layer, u, v)) return false;
    }
    return true;
}

InterpolationResult check_interpolation(std::size_t n_points, std::uint64_t seed,
                                        std::size_t max_epochs, std::size_t input_dim,
                                        std::size_t kernels_per_input,
                                        double learning_rate) {
    if (n_points == 0 || n_points > 20) {
        throw ContractError("check_interpolation: N must be in [1, 20]");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xdist(-5.0, 5.0);
    std::uniform_real_distribution<double> ydist(-1.0, 1.0);

    std::vector<double> xs(n_points * input_dim);
    for (double& v : xs) v = xdist(rng);
    std::vector<double> ys(n_points);
    for (double& v : ys) v = ydist(rng);

    NetworkSpec spec;
    spec.hidden.push_back({LayerDesc::Kind::Urbf, kernels_per_input});
    spec.hidden.push_back({LayerDesc::Kind::Affine, 32});
    BuildOptions opts;
    opts.seed = seed ^ 0x9e3779b97f4a7c15ull;
    Network net = Network::build(spec, input_dim, 1, opts);
    Adam adam(net.parameters(), AdamConfig{learning_rate, 0.9, 0.999, 1e-8});

    const Tensor inputs = Tensor::from({n_points, input_dim}, xs);
    const Tensor targets = Tensor::from({n_points, 1}, ys);

    InterpolationResult result;
    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        Graph g;
        NodeId x = g.leaf(std::make_shared<Tensor>(inputs));
        NodeId y = g.leaf(std::make_shared<Tensor>(targets));
        NodeId loss = g.mean(g.square(g.subtract(net.forward(g, x), y)));
        result.final_mse = g.value(loss)[0];
        result.epochs_run = epoch;
        if (result.final_mse < 1e-4) break;
        adam.zero_grad();
        g.backward(loss);
        adam.step();
        net.project_constraints();
    }
    return result;
}

}  // namespace urbf
