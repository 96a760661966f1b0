#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "urbf/graph.hpp"
#include "urbf/tensor.hpp"

namespace urbf {

/// Floor for every kernel spread, enforced after each optimizer step.
inline constexpr double kSigmaMin = 1e-3;

/// exp(-u^2 / 2v^2). v must respect the spread floor.
double gaussian_kernel(double u, double v);

/// K centers spread equidistantly over [lo, hi], endpoints included.
std::vector<double> init_urbf_centers(double lo, double hi, std::size_t k);

enum class Activation { Relu, None };

/// Fully connected layer. Weights are stored [in x out]; column l holds
/// the incoming weights of output l, so the bias length equals the
/// weight column count.
struct AffineLayer {
    TensorPtr weights;  // [in x out]
    TensorPtr bias;     // [out]
    Activation activation = Activation::None;

    static AffineLayer create(std::size_t in, std::size_t out, Activation act,
                              std::mt19937_64& rng);

    std::size_t in_features() const { return weights->rows(); }
    std::size_t out_features() const { return weights->cols(); }

    NodeId forward(Graph& g, NodeId x) const;
};

/// One bank of K 1-d Gaussian kernels per input dimension; output width
/// is D*K. Centers start equidistant over init_range, spreads start at
/// one inter-center spacing.
struct UrbfLayer {
    std::size_t input_dim = 0;
    std::size_t kernels_per_input = 0;  // NNPI
    TensorPtr centers;  // [D x K]
    TensorPtr spreads;  // [D x K]
    double range_lo = 0.0;
    double range_hi = 0.0;
    bool spreads_learnable = true;

    static UrbfLayer create(std::size_t input_dim, std::size_t kernels_per_input,
                            double range_lo, double range_hi,
                            bool spreads_learnable = true);

    std::size_t output_dim() const { return input_dim * kernels_per_input; }

    NodeId forward(Graph& g, NodeId x) const;

    /// Projects every spread back to >= kSigmaMin.
    void clamp_spreads();
};

/// Classical RBF layer with multivariate centers and per-kernel output
/// weights; kernels measure Euclidean distance to the center.
struct MrbfLayer {
    std::size_t input_dim = 0;
    std::size_t num_kernels = 0;
    TensorPtr centers;  // [K x D]
    TensorPtr spreads;  // [K]
    TensorPtr weights;  // [J x K]

    static MrbfLayer create(std::size_t input_dim, std::size_t num_kernels,
                            std::size_t output_dim, double range_lo, double range_hi,
                            std::mt19937_64& rng);

    std::size_t output_dim() const { return weights->rows(); }

    NodeId forward(Graph& g, NodeId x) const;

    void clamp_spreads();
};

struct LayerDesc {
    enum class Kind { Affine, Urbf, Mrbf };
    Kind kind = Kind::Affine;
    std::size_t width = 0;  // affine: output units; urbf: NNPI; mrbf: kernel count

    bool operator==(const LayerDesc&) const = default;
};

/// Hidden-layer stack of a compared architecture; the scalar/Q output
/// head is appended at build time.
struct NetworkSpec {
    std::vector<LayerDesc> hidden;

    /// Parses e.g. "32,64,128", "urbf:20,32,64,128", "mrbf:32,64".
    /// Bare numbers are affine widths.
    static NetworkSpec parse(const std::string& text);
    std::string to_string() const;

    bool operator==(const NetworkSpec&) const = default;
};

struct BuildOptions {
    double range_lo = -5.0;
    double range_hi = 5.0;
    bool spreads_learnable = true;
    std::uint64_t seed = 0;
};

/// A realized network: layers composed per spec, ReLU between affine
/// hidden layers, no activation directly after an RBF-type layer, and a
/// linear head. Composition mismatches surface at construction.
class Network {
public:
    static Network build(const NetworkSpec& spec, std::size_t input_dim,
                         std::size_t output_dim, const BuildOptions& opts);

    NodeId forward(Graph& g, NodeId x) const;

    /// Forward pass on raw inputs, no graph retained.
    std::vector<double> predict(const std::vector<double>& input) const;

    std::vector<TensorPtr> parameters() const;
    std::size_t parameter_count() const;

    /// Spread-floor projection, called after each optimizer step.
    void project_constraints();

    Network clone() const;

    /// Copies parameter values from another network of identical shape.
    void copy_parameters_from(const Network& other);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }

    const std::vector<UrbfLayer>& urbf_layers() const { return urbf_; }
    const std::vector<MrbfLayer>& mrbf_layers() const { return mrbf_; }
    const std::vector<AffineLayer>& affine_layers() const { return affine_; }

private:
    struct Slot {
        LayerDesc::Kind kind;
        std::size_t index;  // into the per-kind vector
    };

    std::size_t input_dim_ = 0;
    std::size_t output_dim_ = 0;
    std::vector<Slot> order_;
    std::vector<AffineLayer> affine_;
    std::vector<UrbfLayer> urbf_;
    std::vector<MrbfLayer> mrbf_;
};

/// True iff some dimension's kernel bank separates u and v
/// (componentwise difference above 1e-12 somewhere, for every dimension).
bool kernel_map_distinct(const UrbfLayer& layer, double u, double v);

/// Draws random pairs u != v from the layer's init range and checks that
/// every dimension's kernel bank maps them to distinct vectors
/// (componentwise difference above 1e-12 somewhere).
bool check_injectivity(const UrbfLayer& layer, std::size_t samples, std::uint64_t seed);

struct InterpolationResult {
    double final_mse = 0.0;
    std::size_t epochs_run = 0;
};

/// Fits a small U-RBF network to N random points with full-batch Adam
/// and reports the achieved training MSE.
InterpolationResult check_interpolation(std::size_t n_points, std::uint64_t seed,
                                        std::size_t max_epochs,
                                        std::size_t input_dim = 2,
                                        std::size_t kernels_per_input = 10,
                                        double learning_rate = 1e-2);

}  // namespace urbf
