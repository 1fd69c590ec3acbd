#ifndef ATD_TRAINER_HPP
#define ATD_TRAINER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "embed_net.hpp"
#include "error.hpp"
#include "evalharness.hpp"
#include "geometry.hpp"
#include "ordinal_targets.hpp"
#include "rng.hpp"

/**
 * @file trainer.hpp
 *
 * @brief Training loop for the ordinal triplet network.
 *
 * Each triplet `(x_i, x_j, x_k)` is embedded by the shared network, the two
 * predicted angular distances `d(z_i, z_j)` and `d(z_j, z_k)` are compared
 * with the template targets under a squared error, and the mean over the
 * batch is minimized with Adam. After each epoch the validation set is
 * embedded and scored by leave-one-out neighbor accuracy; the parameters of
 * the best epoch are returned.
 */

namespace atd {

using DistancePair = std::array<double, 2>;

/**
 * Mean over samples of `(y_ij - p_ij)^2 + (y_jk - p_jk)^2`.
 *
 * Throws `argument` for empty or misaligned inputs.
 */
inline double compute_loss(std::span<const DistancePair> predicted, std::span<const DistancePair> targets) {
    detail::require(!predicted.empty(), ErrorCategory::argument, "loss needs at least one sample");
    detail::require(predicted.size() == targets.size(), ErrorCategory::argument,
        std::to_string(predicted.size()) + " predictions but " + std::to_string(targets.size()) + " targets");
    double sum = 0;
    for (std::size_t t = 0; t < predicted.size(); ++t) {
        double e0 = targets[t][0] - predicted[t][0];
        double e1 = targets[t][1] - predicted[t][1];
        sum += e0 * e0 + e1 * e1;
    }
    return sum / static_cast<double>(predicted.size());
}

/** Default margin keeping the arccos argument away from +-1. */
inline constexpr double default_arccos_guard = 1e-7;

/** `arccos(clamp(u, -1 + guard, 1 - guard)) / pi`. */
inline double guarded_angular_distance(double cosine, double guard) {
    return std::acos(std::clamp(cosine, -1.0 + guard, 1.0 - guard)) / std::numbers::pi;
}

/** Derivative of `guarded_angular_distance` in `cosine`; zero where the clamp is active. */
inline double guarded_angular_distance_slope(double cosine, double guard) {
    if (cosine < -1.0 + guard || cosine > 1.0 - guard) {
        return 0.0;
    }
    return -1.0 / (std::numbers::pi * std::sqrt(1.0 - cosine * cosine));
}

namespace detail {

inline void check_unit(std::span<const double> z, const char* name) {
    double length = std::sqrt(squared_norm(z));
    require(std::abs(length - 1.0) <= 1e-6, ErrorCategory::argument,
        std::string(name) + " must be unit length, has norm " + std::to_string(length));
}

}

struct PairGradient {
    std::vector<double> first;
    std::vector<double> second;
};

/**
 * Gradient of `(target - d(a, b))^2` in `a` and `b`, where `d` is the
 * guarded angular distance of the unit vectors' dot product.
 */
inline PairGradient pair_loss_gradient(std::span<const double> a, std::span<const double> b, double target, double guard) {
    detail::check_same_dimension(a, b);
    double cosine = dot(a, b);
    double coeff = 2.0 * (guarded_angular_distance(cosine, guard) - target) * guarded_angular_distance_slope(cosine, guard);
    PairGradient out{std::vector<double>(a.size()), std::vector<double>(a.size())};
    for (std::size_t d = 0; d < a.size(); ++d) {
        out.first[d] = coeff * b[d];
        out.second[d] = coeff * a[d];
    }
    return out;
}

struct TripletGradient {
    std::vector<double> i;
    std::vector<double> j;
    std::vector<double> k;
};

namespace detail {

inline TripletGradient triplet_gradient(std::span<const double> z_i, std::span<const double> z_j,
    std::span<const double> z_k, DistancePair targets, double guard) {
    auto left = pair_loss_gradient(z_i, z_j, targets[0], guard);
    auto right = pair_loss_gradient(z_j, z_k, targets[1], guard);
    TripletGradient out{std::move(left.first), std::move(left.second), std::move(right.second)};
    for (std::size_t d = 0; d < out.j.size(); ++d) {
        out.j[d] += right.first[d];
    }
    return out;
}

}

/**
 * Gradient of one triplet's loss `(y_ij - d(z_i, z_j))^2 + (y_jk - d(z_j, z_k))^2`
 * with respect to the three unit embeddings. `z_j` receives contributions
 * from both terms.
 *
 * Throws `argument` if an embedding's norm is more than 1e-6 away from 1.
 */
inline TripletGradient loss_gradient_wrt_embeddings(std::span<const double> z_i, std::span<const double> z_j,
    std::span<const double> z_k, DistancePair targets, double guard = default_arccos_guard) {
    detail::check_unit(z_i, "z_i");
    detail::check_unit(z_j, "z_j");
    detail::check_unit(z_k, "z_k");
    return detail::triplet_gradient(z_i, z_j, z_k, targets, guard);
}

/** Predicted `(d(z_i, z_j), d(z_j, z_k))` for unit embeddings. */
inline DistancePair predicted_distances(std::span<const double> z_i, std::span<const double> z_j, std::span<const double> z_k,
    double guard = default_arccos_guard) {
    return {guarded_angular_distance(dot(z_i, z_j), guard), guarded_angular_distance(dot(z_j, z_k), guard)};
}

/** Reusable buffers for `batch_loss_and_gradient`. */
struct BatchWorkspace {
    std::array<ForwardTrace, 3> traces;
};

/**
 * Mean batch loss; when `grads` is non-null, also adds the gradient of that
 * mean loss with respect to every parameter into `*grads`.
 */
inline double batch_loss_and_gradient(const NetworkParameters& params, const OrdinalDataset& data, const TripletBatch& batch,
    double guard, NetworkGradients* grads, BatchWorkspace& work) {
    detail::require(batch.size() > 0, ErrorCategory::argument, "empty triplet batch");
    double scale = 1.0 / static_cast<double>(batch.size());
    double sum = 0;
    for (std::size_t t = 0; t < batch.size(); ++t) {
        auto inputs = batch.inputs(data, t);
        for (std::size_t s = 0; s < 3; ++s) {
            forward_into(params, inputs[s], work.traces[s]);
        }
        const auto& zi = work.traces[0].embedding;
        const auto& zj = work.traces[1].embedding;
        const auto& zk = work.traces[2].embedding;
        const auto& targets = batch.triplets[t].targets;

        auto predicted = predicted_distances(zi, zj, zk, guard);
        double e0 = targets[0] - predicted[0];
        double e1 = targets[1] - predicted[1];
        sum += e0 * e0 + e1 * e1;

        if (grads != nullptr) {
            auto g = detail::triplet_gradient(zi, zj, zk, targets, guard);
            for (auto* vec : {&g.i, &g.j, &g.k}) {
                for (auto& x : *vec) {
                    x *= scale;
                }
            }
            backward_accumulate(params, work.traces[0], g.i, *grads);
            backward_accumulate(params, work.traces[1], g.j, *grads);
            backward_accumulate(params, work.traces[2], g.k, *grads);
        }
    }
    return sum * scale;
}

inline double batch_loss(const NetworkParameters& params, const OrdinalDataset& data, const TripletBatch& batch,
    double guard = default_arccos_guard) {
    BatchWorkspace work;
    return batch_loss_and_gradient(params, data, batch, guard, nullptr, work);
}

/**
 * @brief Training hyperparameters.
 */
struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    /** 0 means `ceil(|train| / batch_size)`. */
    std::size_t batches_per_epoch = 0;
    double learning_rate = 1e-4;
    double arccos_guard = default_arccos_guard;
    std::uint64_t seed = 0;
    /** Neighbor count of the validation accuracy used for model selection. */
    std::size_t validation_k = 3;

    std::size_t resolved_batches(std::size_t train_size) const {
        if (batches_per_epoch > 0) {
            return batches_per_epoch;
        }
        return (train_size + batch_size - 1) / batch_size;
    }

    /** Throws `argument` on a non-positive count or a guard outside `(0, 1e-3]`. */
    void validate() const {
        detail::require(batch_size >= 1, ErrorCategory::argument, "batch_size must be at least 1");
        detail::require(validation_k >= 1, ErrorCategory::argument, "validation k must be at least 1");
        detail::require(arccos_guard > 0 && arccos_guard <= 1e-3, ErrorCategory::argument, "arccos guard must lie in (0, 1e-3]");
        detail::require(std::isfinite(learning_rate) && learning_rate >= 0, ErrorCategory::argument, "learning rate must be finite and non-negative");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_loss = 0;
    double validation_accuracy = 0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/**
 * @brief Per-epoch losses and validation accuracies.
 */
struct TrainHistory {
    std::vector<EpochRecord> epochs;
    /** Epoch with the highest validation accuracy (earliest on ties); meaningless when `epochs` is empty. */
    std::size_t best_epoch = 0;

    friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
    NetworkParameters best;
    TrainHistory history;
};

using ProgressSink = std::function<void(const EpochRecord&)>;

namespace detail {

inline Error with_location(const Error& err, std::size_t epoch, const std::string& where) {
    return Error(err.category(), "epoch " + std::to_string(epoch) + ", " + where + ": " + err.what());
}

}

/**
 * Train from the given starting parameters. With `config.epochs == 0` no
 * update runs and `initial` is returned unchanged with an empty history.
 *
 * Throws `missing_category` if a training category is empty and
 * `degenerate_output` (annotated with epoch and batch) if the network maps
 * an input to the zero vector.
 */
inline TrainResult train(const OrdinalDataset& train_set, const OrdinalDataset& val_set, const TrainConfig& config,
    const NetworkParameters& initial, const ProgressSink& sink = {}) {
    config.validate();
    train_set.validate();
    val_set.validate();
    initial.validate();
    detail::require(train_set.dimension() == val_set.dimension(), ErrorCategory::argument,
        "train and validation sets have different feature dimensions");
    detail::require(train_set.categories == val_set.categories, ErrorCategory::argument,
        "train and validation sets have different category counts");
    detail::require(train_set.dimension() == initial.input_dim(), ErrorCategory::argument,
        "network expects " + std::to_string(initial.input_dim()) + " features, data has " + std::to_string(train_set.dimension()));

    TrainResult result{initial, {}};
    if (config.epochs == 0) {
        return result;
    }

    Rng rng(config.seed);
    TripletSampler sampler(train_set, triplet_templates(train_set.categories));
    NetworkParameters params = initial;
    auto state = OptimizerState::for_network(params, AdamConfig{config.learning_rate});
    auto grads = NetworkGradients::zeros_like(params);
    BatchWorkspace work;
    std::size_t batches = config.resolved_batches(train_set.size());
    double best_accuracy = -1;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            auto batch = sampler.sample(config.batch_size, rng);
            grads.set_zero();
            try {
                loss_sum += batch_loss_and_gradient(params, train_set, batch, config.arccos_guard, &grads, work);
            } catch (const Error& err) {
                if (err.category() != ErrorCategory::degenerate_output) {
                    throw;
                }
                throw detail::with_location(err, epoch, "batch " + std::to_string(b));
            }
            adam_step(params, grads, state);
        }

        Matrix val_embeddings;
        try {
            val_embeddings = embed_rows(params, val_set.features);
        } catch (const Error& err) {
            if (err.category() != ErrorCategory::degenerate_output) {
                throw;
            }
            throw detail::with_location(err, epoch, "validation");
        }

        EpochRecord record{epoch, loss_sum / static_cast<double>(batches),
            knn_accuracy(val_embeddings, val_set.labels, config.validation_k)};
        result.history.epochs.push_back(record);
        if (record.validation_accuracy > best_accuracy) {
            best_accuracy = record.validation_accuracy;
            result.history.best_epoch = epoch;
            result.best = params;
        }
        if (sink) {
            sink(record);
        }
    }
    return result;
}

/**
 * Initialize `arch` from `config.seed` and train. The same seed then drives
 * triplet sampling, so a run is fully determined by its inputs.
 */
inline TrainResult train(const OrdinalDataset& train_set, const OrdinalDataset& val_set, const TrainConfig& config,
    const Architecture& arch, const ProgressSink& sink = {}) {
    Rng init_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    return train(train_set, val_set, config, initialize_network(arch, init_rng), sink);
}

}

#endif
