#ifndef ATD_EMBED_NET_HPP
#define ATD_EMBED_NET_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "rng.hpp"

/**
 * @file embed_net.hpp
 *
 * @brief Feed-forward embedding network with an L2-normalized output.
 *
 * The network is a stack of dense layers, each followed by relu or the
 * identity, and a final L2 normalization that puts every embedding on the
 * unit sphere. One parameter set is shared by all three members of a
 * triplet. `forward` records what `backward` needs; `adam_step` is the only
 * function that mutates parameters.
 */

namespace atd {

enum class Activation { identity, relu };

inline std::string_view activation_name(Activation act) {
    return act == Activation::relu ? "relu" : "identity";
}

inline Activation parse_activation(std::string_view name) {
    if (name == "relu") {
        return Activation::relu;
    }
    if (name == "identity" || name == "linear") {
        return Activation::identity;
    }
    detail::fail(ErrorCategory::argument, "unknown activation '" + std::string(name) + "'");
}

struct LayerSpec {
    std::size_t units = 0;
    Activation activation = Activation::relu;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/**
 * @brief Layer shapes of an embedding network.
 */
struct Architecture {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> layers;
    /** Normalize the last layer's output to unit length; only gradient tests switch this off. */
    bool l2_normalize = true;

    std::size_t embedding_dim() const { return layers.empty() ? input_dim : layers.back().units; }

    /**
     * Default head for tabular data: two relu layers of `hidden` units, then
     * a dense layer of `embedding_dim` units with `final_activation`, then L2
     * normalization.
     */
    static Architecture tabular(std::size_t input_dim, std::size_t embedding_dim = 100, std::size_t hidden = 64,
        Activation final_activation = Activation::identity) {
        return {input_dim, {{hidden, Activation::relu}, {hidden, Activation::relu}, {embedding_dim, final_activation}}, true};
    }

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DenseLayer {
    /** `out x in`. */
    Matrix weights;
    std::vector<double> bias;
    Activation activation = Activation::relu;

    std::size_t inputs() const { return weights.cols(); }
    std::size_t outputs() const { return weights.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/**
 * @brief Weights and biases of the embedding network.
 */
struct NetworkParameters {
    std::vector<DenseLayer> layers;
    bool l2_normalize = true;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().inputs(); }
    std::size_t embedding_dim() const { return layers.empty() ? 0 : layers.back().outputs(); }

    Architecture architecture() const {
        Architecture arch{input_dim(), {}, l2_normalize};
        for (const auto& layer : layers) {
            arch.layers.push_back({layer.outputs(), layer.activation});
        }
        return arch;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& layer : layers) {
            n += layer.weights.values().size() + layer.bias.size();
        }
        return n;
    }

    /** Throws `argument` unless layer shapes chain and every entry is finite. */
    void validate() const {
        detail::require(!layers.empty(), ErrorCategory::argument, "network has no layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& layer = layers[k];
            detail::require(layer.bias.size() == layer.outputs(), ErrorCategory::argument,
                "layer " + std::to_string(k) + " bias length does not match its output count");
            if (k > 0) {
                detail::require(layer.inputs() == layers[k - 1].outputs(), ErrorCategory::argument,
                    "layer " + std::to_string(k) + " expects " + std::to_string(layer.inputs()) +
                    " inputs but the previous layer produces " + std::to_string(layers[k - 1].outputs()));
            }
            for (double w : layer.weights.values()) {
                detail::require(std::isfinite(w), ErrorCategory::argument, "non-finite weight in layer " + std::to_string(k));
            }
            for (double b : layer.bias) {
                detail::require(std::isfinite(b), ErrorCategory::argument, "non-finite bias in layer " + std::to_string(k));
            }
        }
    }

    friend bool operator==(const NetworkParameters&, const NetworkParameters&) = default;
};

/**
 * Uniform initialization with bound `gain * sqrt(3 / fan_in)`, using gain
 * `sqrt(2)` for relu layers and 1 otherwise. Relu biases start at
 * `relu_initial_bias` so an all-zero input row still reaches the output;
 * other biases start at zero.
 */
inline constexpr double relu_initial_bias = 0.01;

inline NetworkParameters initialize_network(const Architecture& arch, Rng& rng) {
    detail::require(arch.input_dim > 0, ErrorCategory::argument, "input dimension must be positive");
    detail::require(!arch.layers.empty(), ErrorCategory::argument, "architecture has no layers");
    if (arch.l2_normalize) {
        detail::require(arch.embedding_dim() >= 2, ErrorCategory::argument, "embedding dimension must be at least 2");
    }

    NetworkParameters params;
    params.l2_normalize = arch.l2_normalize;
    std::size_t fan_in = arch.input_dim;
    for (const auto& spec : arch.layers) {
        detail::require(spec.units > 0, ErrorCategory::argument, "layer width must be positive");
        double gain = spec.activation == Activation::relu ? std::sqrt(2.0) : 1.0;
        double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
        DenseLayer layer{Matrix(spec.units, fan_in), std::vector<double>(spec.units, spec.activation == Activation::relu ? relu_initial_bias : 0.0), spec.activation};
        for (auto& w : layer.weights.values()) {
            w = rng.uniform(-bound, bound);
        }
        params.layers.push_back(std::move(layer));
        fan_in = spec.units;
    }
    return params;
}

/**
 * @brief Intermediate values of one forward pass.
 */
struct ForwardTrace {
    std::vector<double> input;
    /** Per layer, before the activation. */
    std::vector<std::vector<double>> pre_activations;
    /** Per layer, after the activation. The last entry is the un-normalized output. */
    std::vector<std::vector<double>> activations;
    /** Length of the un-normalized output; 1 when normalization is off. */
    double output_norm = 1;
    /** Final embedding (unit length when the network normalizes). */
    std::vector<double> embedding;
};

/**
 * Forward pass into a reusable trace.
 *
 * Throws `argument` if `x` has the wrong length and `degenerate_output` if
 * the un-normalized output is shorter than `norm_floor`.
 */
inline void forward_into(const NetworkParameters& params, std::span<const double> x, ForwardTrace& trace) {
    detail::require(!params.layers.empty(), ErrorCategory::argument, "network has no layers");
    detail::require(x.size() == params.input_dim(), ErrorCategory::argument,
        "input has " + std::to_string(x.size()) + " features, network expects " + std::to_string(params.input_dim()));

    std::size_t depth = params.layers.size();
    trace.input.assign(x.begin(), x.end());
    trace.pre_activations.resize(depth);
    trace.activations.resize(depth);

    std::span<const double> current = trace.input;
    for (std::size_t k = 0; k < depth; ++k) {
        const auto& layer = params.layers[k];
        auto& pre = trace.pre_activations[k];
        auto& act = trace.activations[k];
        pre.resize(layer.outputs());
        act.resize(layer.outputs());
        for (std::size_t o = 0; o < layer.outputs(); ++o) {
            pre[o] = layer.bias[o] + dot(layer.weights.row(o), current);
        }
        if (layer.activation == Activation::relu) {
            for (std::size_t o = 0; o < pre.size(); ++o) {
                act[o] = pre[o] > 0 ? pre[o] : 0.0;
            }
        } else {
            act = pre;
        }
        current = act;
    }

    const auto& out = trace.activations.back();
    trace.embedding = out;
    if (params.l2_normalize) {
        double length = std::sqrt(squared_norm(out));
        detail::require(length >= norm_floor, ErrorCategory::degenerate_output,
            "network output has norm " + std::to_string(length) + "; every unit of the last layer is inactive");
        trace.output_norm = length;
        for (auto& z : trace.embedding) {
            z /= length;
        }
    } else {
        trace.output_norm = 1;
    }
}

inline ForwardTrace forward(const NetworkParameters& params, std::span<const double> x) {
    ForwardTrace trace;
    forward_into(params, x, trace);
    return trace;
}

/** Embed every row of `features`. */
inline Matrix embed_rows(const NetworkParameters& params, const Matrix& features) {
    Matrix out(features.rows(), params.embedding_dim());
    ForwardTrace trace;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        forward_into(params, features.row(i), trace);
        std::copy(trace.embedding.begin(), trace.embedding.end(), out.row(i).begin());
    }
    return out;
}

/**
 * Backpropagate through `z = p / |p|`: returns `(I - z z^T) g / |p|`.
 * The result is orthogonal to `z`.
 */
inline std::vector<double> normalize_backward(std::span<const double> unit_output, double output_norm, std::span<const double> grad) {
    double along = dot(unit_output, grad);
    std::vector<double> out(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        out[i] = (grad[i] - unit_output[i] * along) / output_norm;
    }
    return out;
}

struct LayerGradient {
    Matrix weights;
    std::vector<double> bias;

    friend bool operator==(const LayerGradient&, const LayerGradient&) = default;
};

/**
 * @brief Gradient (or any per-parameter buffer) shaped like a network.
 */
struct NetworkGradients {
    std::vector<LayerGradient> layers;

    static NetworkGradients zeros_like(const NetworkParameters& params) {
        NetworkGradients g;
        for (const auto& layer : params.layers) {
            g.layers.push_back({Matrix(layer.outputs(), layer.inputs()), std::vector<double>(layer.outputs(), 0.0)});
        }
        return g;
    }

    void set_zero() {
        for (auto& layer : layers) {
            std::fill(layer.weights.values().begin(), layer.weights.values().end(), 0.0);
            std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        }
    }

    bool matches(const NetworkParameters& params) const {
        if (layers.size() != params.layers.size()) {
            return false;
        }
        for (std::size_t k = 0; k < layers.size(); ++k) {
            if (layers[k].weights.rows() != params.layers[k].weights.rows() ||
                layers[k].weights.cols() != params.layers[k].weights.cols() ||
                layers[k].bias.size() != params.layers[k].bias.size()) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const NetworkGradients&, const NetworkGradients&) = default;
};

/**
 * Accumulate `dL/dparams` into `grads` given `grad_z = dL/dz` for the
 * embedding recorded in `trace`.
 *
 * Throws `argument` if `grad_z`, `trace` or `grads` do not match `params`.
 */
inline void backward_accumulate(const NetworkParameters& params, const ForwardTrace& trace, std::span<const double> grad_z,
    NetworkGradients& grads) {
    std::size_t depth = params.layers.size();
    detail::require(grad_z.size() == params.embedding_dim(), ErrorCategory::argument,
        "upstream gradient has length " + std::to_string(grad_z.size()) + ", embedding has " +
        std::to_string(params.embedding_dim()));
    detail::require(trace.activations.size() == depth && trace.pre_activations.size() == depth &&
        trace.input.size() == params.input_dim() && trace.embedding.size() == params.embedding_dim(),
        ErrorCategory::argument, "forward trace does not belong to these parameters");
    detail::require(grads.matches(params), ErrorCategory::argument, "gradient buffer is shaped differently from the parameters");

    std::vector<double> upstream = params.l2_normalize
        ? normalize_backward(trace.embedding, trace.output_norm, grad_z)
        : std::vector<double>(grad_z.begin(), grad_z.end());
    std::vector<double> next;

    for (std::size_t k = depth; k-- > 0;) {
        const auto& layer = params.layers[k];
        auto& grad = grads.layers[k];
        const auto& pre = trace.pre_activations[k];
        std::span<const double> layer_input = k == 0 ? std::span<const double>(trace.input) : std::span<const double>(trace.activations[k - 1]);

        if (layer.activation == Activation::relu) {
            for (std::size_t o = 0; o < upstream.size(); ++o) {
                if (!(pre[o] > 0)) {
                    upstream[o] = 0;
                }
            }
        }

        bool need_input_grad = k > 0;
        if (need_input_grad) {
            next.assign(layer.inputs(), 0.0);
        }
        for (std::size_t o = 0; o < layer.outputs(); ++o) {
            double g = upstream[o];
            if (g == 0) {
                continue;
            }
            grad.bias[o] += g;
            auto grad_row = grad.weights.row(o);
            auto w_row = layer.weights.row(o);
            for (std::size_t i = 0; i < layer_input.size(); ++i) {
                grad_row[i] += g * layer_input[i];
            }
            if (need_input_grad) {
                for (std::size_t i = 0; i < next.size(); ++i) {
                    next[i] += w_row[i] * g;
                }
            }
        }
        if (need_input_grad) {
            upstream.swap(next);
        }
    }
}

inline NetworkGradients backward(const NetworkParameters& params, const ForwardTrace& trace, std::span<const double> grad_z) {
    auto grads = NetworkGradients::zeros_like(params);
    backward_accumulate(params, trace, grad_z, grads);
    return grads;
}

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/**
 * @brief Adam moments and step counter.
 */
struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    NetworkGradients first_moment;
    NetworkGradients second_moment;

    static OptimizerState for_network(const NetworkParameters& params, AdamConfig config = {}) {
        return {config, 0, NetworkGradients::zeros_like(params), NetworkGradients::zeros_like(params)};
    }
};

namespace detail {

inline void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
    const AdamConfig& cfg, double correction1, double correction2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g;
        double m_hat = m[i] / correction1;
        double v_hat = v[i] / correction2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}

/**
 * One Adam step with bias-corrected moments:
 * `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`. Increments `state.step`.
 */
inline void adam_step(NetworkParameters& params, const NetworkGradients& grads, OptimizerState& state) {
    detail::require(grads.matches(params), ErrorCategory::argument, "gradients are shaped differently from the parameters");
    detail::require(state.first_moment.matches(params) && state.second_moment.matches(params), ErrorCategory::argument,
        "optimizer state is shaped differently from the parameters");

    ++state.step;
    const auto& cfg = state.config;
    double t = static_cast<double>(state.step);
    double correction1 = 1 - std::pow(cfg.beta1, t);
    double correction2 = 1 - std::pow(cfg.beta2, t);

    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto& layer = params.layers[k];
        detail::adam_update(layer.weights.values(), grads.layers[k].weights.values(),
            state.first_moment.layers[k].weights.values(), state.second_moment.layers[k].weights.values(),
            cfg, correction1, correction2);
        detail::adam_update(layer.bias, grads.layers[k].bias, state.first_moment.layers[k].bias,
            state.second_moment.layers[k].bias, cfg, correction1, correction2);
    }
}

}

#endif
