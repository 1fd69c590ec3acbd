#ifndef ATD_ORDINAL_TARGETS_HPP
#define ATD_ORDINAL_TARGETS_HPP

#include <array>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "rng.hpp"

/**
 * @file ordinal_targets.hpp
 *
 * @brief Target angles for ordinal categories and the triplet templates built from them.
 *
 * With `C` ordered categories the half circle is cut into `C - 1` equal
 * steps, so ranks `a` and `b` sit `|a - b| / (C - 1)` of pi apart. Triplets
 * come from `2C - 1` templates: one inner template `(r, r, r)` per category,
 * plus boundary templates `(0, r, C - 1)` that place every middle category
 * between the two extremes, the last being the full rotation `(0, C - 1, 0)`.
 */

namespace atd {

/** Exact rational target, kept alongside its floating-point value. */
struct Fraction {
    int numerator = 0;
    int denominator = 1;

    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }

    friend bool operator==(const Fraction& a, const Fraction& b) {
        return static_cast<long long>(a.numerator) * b.denominator == static_cast<long long>(b.numerator) * a.denominator;
    }
};

/** Exact target angular distance between ranks, as a fraction of pi. */
inline Fraction target_fraction(int rank_a, int rank_b, int categories) {
    detail::check_category_count(categories);
    detail::check_rank(rank_a, categories);
    detail::check_rank(rank_b, categories);
    return {std::abs(rank_a - rank_b), categories - 1};
}

/**
 * Target angular distance `|rank_a - rank_b| / (C - 1)`.
 *
 * Throws `unsupported_category_count` for `C < 3` and `argument` for an
 * out-of-range rank.
 */
inline double target_distance(int rank_a, int rank_b, int categories) {
    return target_fraction(rank_a, rank_b, categories).value();
}

enum class TemplateKind { inner, boundary, full_rotation };

/**
 * @brief A triple of category ranks with its two target distances.
 */
struct TripletTemplate {
    TemplateKind kind = TemplateKind::inner;
    std::array<int, 3> ranks{};
    /** Exact targets `(y_ij, y_jk)`. */
    std::array<Fraction, 2> exact_targets{};

    std::array<double, 2> targets() const { return {exact_targets[0].value(), exact_targets[1].value()}; }
};

inline TripletTemplate make_template(TemplateKind kind, std::array<int, 3> ranks, int categories) {
    return {kind, ranks, {target_fraction(ranks[0], ranks[1], categories), target_fraction(ranks[1], ranks[2], categories)}};
}

/**
 * The `2C - 1` templates in a fixed order: the `C` inner templates for ranks
 * `0..C-1`, then the boundary templates `(0, r, C-1)` for `r = 1..C-2`, then
 * the full rotation `(0, C-1, 0)`.
 */
inline std::vector<TripletTemplate> triplet_templates(int categories) {
    detail::check_category_count(categories);
    int top = categories - 1;
    std::vector<TripletTemplate> out;
    out.reserve(static_cast<std::size_t>(2 * categories - 1));
    for (int r = 0; r < categories; ++r) {
        out.push_back(make_template(TemplateKind::inner, {r, r, r}, categories));
    }
    for (int r = 1; r < top; ++r) {
        out.push_back(make_template(TemplateKind::boundary, {0, r, top}, categories));
    }
    out.push_back(make_template(TemplateKind::full_rotation, {0, top, 0}, categories));
    return out;
}

/**
 * @brief One sampled training triple: three dataset rows plus their targets.
 */
struct Triplet {
    std::array<std::size_t, 3> rows{};
    std::array<double, 2> targets{};
    std::size_t template_index = 0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/**
 * @brief A batch of triplets referring to rows of one dataset.
 *
 * Rows are stored as indices; `inputs(dataset, t)` yields the three feature
 * vectors of triplet `t`.
 */
struct TripletBatch {
    std::vector<Triplet> triplets;

    std::size_t size() const { return triplets.size(); }

    std::array<std::span<const double>, 3> inputs(const OrdinalDataset& data, std::size_t t) const {
        const auto& rows = triplets[t].rows;
        return {data.features.row(rows[0]), data.features.row(rows[1]), data.features.row(rows[2])};
    }

    friend bool operator==(const TripletBatch&, const TripletBatch&) = default;
};

/**
 * @brief Samples triplet batches from a dataset.
 *
 * The per-category row lists are built once. Each triplet picks a template
 * uniformly at random, then one row uniformly (with replacement) from each
 * of the template's categories, so rows may repeat inside a triplet when a
 * category is small.
 */
class TripletSampler {
public:
    TripletSampler(const OrdinalDataset& data, std::vector<TripletTemplate> templates) :
        templates_(std::move(templates)), members_(data.members_by_category()) {
        detail::require(!templates_.empty(), ErrorCategory::argument, "no triplet templates given");
        for (const auto& tmpl : templates_) {
            for (int rank : tmpl.ranks) {
                detail::check_rank(rank, data.categories);
                detail::require(!members_[static_cast<std::size_t>(rank)].empty(), ErrorCategory::missing_category,
                    "category rank " + std::to_string(rank) + " has no samples");
            }
        }
    }

    TripletBatch sample(std::size_t batch_size, Rng& rng) const {
        detail::require(batch_size > 0, ErrorCategory::argument, "batch size must be positive");
        TripletBatch batch;
        batch.triplets.reserve(batch_size);
        for (std::size_t t = 0; t < batch_size; ++t) {
            Triplet trip;
            trip.template_index = rng.index(templates_.size());
            const auto& tmpl = templates_[trip.template_index];
            for (std::size_t slot = 0; slot < 3; ++slot) {
                const auto& pool = members_[static_cast<std::size_t>(tmpl.ranks[slot])];
                trip.rows[slot] = pool[rng.index(pool.size())];
            }
            trip.targets = tmpl.targets();
            batch.triplets.push_back(trip);
        }
        return batch;
    }

    const std::vector<TripletTemplate>& templates() const { return templates_; }

private:
    std::vector<TripletTemplate> templates_;
    std::vector<std::vector<std::size_t>> members_;
};

/**
 * Sample one batch of `batch_size` triplets; see `TripletSampler`.
 *
 * Throws `argument` for an empty batch and `missing_category`, naming the
 * rank, when a template refers to a category with no rows.
 */
inline TripletBatch sample_triplet_batch(const OrdinalDataset& data, std::span<const TripletTemplate> templates,
    std::size_t batch_size, Rng& rng) {
    detail::require(batch_size > 0, ErrorCategory::argument, "batch size must be positive");
    TripletSampler sampler(data, {templates.begin(), templates.end()});
    return sampler.sample(batch_size, rng);
}

}

#endif
