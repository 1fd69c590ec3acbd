#ifndef ATD_DATASET_HPP
#define ATD_DATASET_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

namespace atd {

/** Smallest category count handled; two categories is plain binary classification. */
inline constexpr int min_categories = 3;

namespace detail {

inline void check_category_count(int categories) {
    require(categories >= min_categories, ErrorCategory::unsupported_category_count,
        "ordinal problems need at least " + std::to_string(min_categories) + " categories, got " +
        std::to_string(categories));
}

inline void check_rank(int rank, int categories) {
    require(rank >= 0 && rank < categories, ErrorCategory::argument,
        "rank " + std::to_string(rank) + " outside [0, " + std::to_string(categories) + ")");
}

}

/**
 * @brief Feature matrix with one ordinal category rank per row.
 *
 * Ranks run from 0 (lowest category) to `categories - 1` (highest).
 */
struct OrdinalDataset {
    Matrix features;
    std::vector<int> labels;
    int categories = 0;
    std::vector<std::string> feature_names;
    /** Display name of each rank; may be empty. */
    std::vector<std::string> category_names;
    /** Where the data came from: a file path or a synthetic-generator description. */
    std::string provenance;

    std::size_t size() const { return labels.size(); }
    std::size_t dimension() const { return features.cols(); }

    /** Row indices of every rank, each list ascending. */
    std::vector<std::vector<std::size_t>> members_by_category() const {
        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(categories));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            members[static_cast<std::size_t>(labels[i])].push_back(i);
        }
        return members;
    }

    OrdinalDataset subset(std::span<const std::size_t> indices) const {
        OrdinalDataset out;
        out.features = features.select_rows(indices);
        out.labels.reserve(indices.size());
        for (auto i : indices) {
            out.labels.push_back(labels[i]);
        }
        out.categories = categories;
        out.feature_names = feature_names;
        out.category_names = category_names;
        out.provenance = provenance;
        return out;
    }

    /** Throws unless shapes agree, every rank is in range and features are finite. */
    void validate() const {
        detail::check_category_count(categories);
        detail::require(features.rows() == labels.size(), ErrorCategory::argument,
            "feature rows (" + std::to_string(features.rows()) + ") and labels (" +
            std::to_string(labels.size()) + ") differ");
        for (int label : labels) {
            detail::check_rank(label, categories);
        }
        for (double v : features.values()) {
            detail::require(std::isfinite(v), ErrorCategory::argument, "dataset contains a non-finite feature");
        }
    }
};

}

#endif
