#ifndef ATD_EVALHARNESS_HPP
#define ATD_EVALHARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "text.hpp"

/**
 * @file evalharness.hpp
 *
 * @brief Nearest-neighbor accuracy, nearest-neighbor classification and
 * category distance matrices for a set of embeddings.
 *
 * Neighbors are ranked by cosine similarity, highest first, with ties
 * broken by the smaller row index.
 */

namespace atd {

/**
 * @brief The `k` nearest reference rows of each query, best first.
 */
struct NeighborSet {
    std::size_t k = 0;
    /** `queries x k`, row-major. */
    std::vector<std::size_t> indices;

    std::size_t queries() const { return k == 0 ? 0 : indices.size() / k; }

    std::span<const std::size_t> of(std::size_t query) const { return {indices.data() + query * k, k}; }

    friend bool operator==(const NeighborSet&, const NeighborSet&) = default;
};

namespace detail {

inline std::vector<double> checked_row_norms(const Matrix& points) {
    std::vector<double> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        out[i] = squared_norm(points.row(i));
        check_nondegenerate(out[i]);
    }
    return out;
}

// Top-k of `candidates` by (similarity desc, index asc), written to `out`.
inline void select_top_k(std::vector<std::size_t>& candidates, const std::vector<double>& similarity, std::size_t k,
    std::size_t* out) {
    auto better = [&](std::size_t a, std::size_t b) {
        return similarity[a] > similarity[b] || (similarity[a] == similarity[b] && a < b);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(), better);
    std::copy(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), out);
}

inline NeighborSet search(const Matrix& reference, const Matrix& queries, std::size_t k, bool leave_one_out) {
    require(reference.cols() == queries.cols(), ErrorCategory::argument,
        "reference and query dimensions differ: " + std::to_string(reference.cols()) + " vs " + std::to_string(queries.cols()));
    auto ref_norms = checked_row_norms(reference);
    auto query_norms = leave_one_out ? ref_norms : checked_row_norms(queries);

    NeighborSet result{k, std::vector<std::size_t>(queries.rows() * k)};
    std::vector<double> similarity(reference.rows());
    std::vector<std::size_t> candidates;
    candidates.reserve(reference.rows());

    for (std::size_t q = 0; q < queries.rows(); ++q) {
        auto query = queries.row(q);
        candidates.clear();
        for (std::size_t r = 0; r < reference.rows(); ++r) {
            if (leave_one_out && r == q) {
                continue;
            }
            similarity[r] = cosine_from_parts(dot(query, reference.row(r)), query_norms[q], ref_norms[r]);
            candidates.push_back(r);
        }
        select_top_k(candidates, similarity, k, result.indices.data() + q * k);
    }
    return result;
}

inline void check_labels(std::size_t rows, std::span<const int> labels) {
    require(rows == labels.size(), ErrorCategory::argument,
        std::to_string(rows) + " embeddings but " + std::to_string(labels.size()) + " labels");
    for (int label : labels) {
        require(label >= 0, ErrorCategory::argument, "labels must be non-negative ranks");
    }
}

}

/**
 * Leave-one-out neighbors of every row among the other rows.
 * Requires `1 <= k < points.rows()`.
 */
inline NeighborSet leave_one_out_neighbors(const Matrix& points, std::size_t k) {
    detail::require(k >= 1, ErrorCategory::argument, "k must be at least 1");
    detail::require(k < points.rows(), ErrorCategory::argument,
        "k = " + std::to_string(k) + " needs more than " + std::to_string(k) + " points, got " + std::to_string(points.rows()));
    return detail::search(points, points, k, true);
}

/** Neighbors of each query row among `reference`. Requires `1 <= k <= reference.rows()`. */
inline NeighborSet nearest_neighbors(const Matrix& reference, const Matrix& queries, std::size_t k) {
    detail::require(k >= 1, ErrorCategory::argument, "k must be at least 1");
    detail::require(k <= reference.rows(), ErrorCategory::argument,
        "k = " + std::to_string(k) + " exceeds the " + std::to_string(reference.rows()) + " reference points");
    return detail::search(reference, queries, k, false);
}

/**
 * Leave-one-out neighbor accuracy: the fraction of the `k` nearest
 * neighbors of each row that share its label, averaged over all rows,
 * i.e. `sum_i sum_j [label(nbr_j(i)) == label(i)] / (N k)`.
 *
 * Throws `argument` unless `1 <= k < N`.
 */
inline double knn_accuracy(const Matrix& embeddings, std::span<const int> labels, std::size_t k) {
    detail::check_labels(embeddings.rows(), labels);
    auto neighbors = leave_one_out_neighbors(embeddings, k);
    std::size_t hits = 0;
    for (std::size_t q = 0; q < neighbors.queries(); ++q) {
        for (auto n : neighbors.of(q)) {
            hits += labels[n] == labels[q];
        }
    }
    return static_cast<double>(hits) / static_cast<double>(embeddings.rows() * k);
}

/** Majority label among `neighbors`; ties go to the smallest label. */
inline int majority_vote(std::span<const std::size_t> neighbors, std::span<const int> labels) {
    std::vector<std::size_t> counts;
    for (auto n : neighbors) {
        auto label = static_cast<std::size_t>(labels[n]);
        if (label >= counts.size()) {
            counts.resize(label + 1, 0);
        }
        ++counts[label];
    }
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

inline std::vector<int> knn_classify(const Matrix& train, std::span<const int> train_labels, const Matrix& test, std::size_t k) {
    detail::check_labels(train.rows(), train_labels);
    detail::require(train.rows() > 0 && test.rows() > 0, ErrorCategory::argument, "train and test sets must be non-empty");
    auto neighbors = nearest_neighbors(train, test, k);
    std::vector<int> predicted(test.rows());
    for (std::size_t q = 0; q < test.rows(); ++q) {
        predicted[q] = majority_vote(neighbors.of(q), train_labels);
    }
    return predicted;
}

/**
 * Misclassification rate of a `k`-nearest-neighbor majority vote over the
 * training rows, evaluated on the test rows.
 */
inline double knn_classify_error(const Matrix& train, std::span<const int> train_labels, const Matrix& test,
    std::span<const int> test_labels, std::size_t k) {
    detail::check_labels(test.rows(), test_labels);
    auto predicted = knn_classify(train, train_labels, test, k);
    std::size_t wrong = 0;
    for (std::size_t q = 0; q < predicted.size(); ++q) {
        wrong += predicted[q] != test_labels[q];
    }
    return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

enum class CosineDistance {
    /** `(1 - cos) / 2`, in `[0, 1]`. */
    half,
    /** `1 - cos`, in `[0, 2]`. */
    raw,
};

/**
 * @brief Mean cosine distance between the embeddings of each pair of categories.
 */
struct CategoryDistanceMatrix {
    int categories = 0;
    CosineDistance kind = CosineDistance::half;
    Matrix values;

    double operator()(int r, int c) const { return values(static_cast<std::size_t>(r), static_cast<std::size_t>(c)); }
};

/**
 * Entry `(r, c)` is the mean cosine distance over every pair of one
 * category-`r` and one category-`c` embedding; the diagonal averages over
 * distinct pairs within a category. Symmetric by construction.
 *
 * Throws `insufficient_samples`, naming the rank, when a category has
 * fewer than two embeddings.
 */
inline CategoryDistanceMatrix category_distance_matrix(const Matrix& embeddings, std::span<const int> labels, int categories,
    CosineDistance kind = CosineDistance::half) {
    detail::check_labels(embeddings.rows(), labels);
    detail::require(categories >= 1, ErrorCategory::argument, "category count must be positive");

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(categories));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        detail::check_rank(labels[i], categories);
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int r = 0; r < categories; ++r) {
        detail::require(members[static_cast<std::size_t>(r)].size() >= 2, ErrorCategory::insufficient_samples,
            "category rank " + std::to_string(r) + " has " + std::to_string(members[static_cast<std::size_t>(r)].size()) +
            " embeddings; the distance matrix needs at least 2");
    }

    auto norms = detail::checked_row_norms(embeddings);
    double scale = kind == CosineDistance::half ? 0.5 : 1.0;
    auto distance = [&](std::size_t a, std::size_t b) {
        return scale * (1.0 - cosine_from_parts(dot(embeddings.row(a), embeddings.row(b)), norms[a], norms[b]));
    };

    CategoryDistanceMatrix out{categories, kind, Matrix(static_cast<std::size_t>(categories), static_cast<std::size_t>(categories))};
    for (std::size_t r = 0; r < members.size(); ++r) {
        for (std::size_t c = r; c < members.size(); ++c) {
            double sum = 0;
            std::size_t count = 0;
            for (std::size_t ia = 0; ia < members[r].size(); ++ia) {
                // Within one category, only pairs (a, b) with b after a.
                std::size_t first = r == c ? ia + 1 : 0;
                for (std::size_t ib = first; ib < members[c].size(); ++ib) {
                    sum += distance(members[r][ia], members[c][ib]);
                    ++count;
                }
            }
            double mean = sum / static_cast<double>(count);
            out.values(r, c) = mean;
            out.values(c, r) = mean;
        }
    }
    return out;
}

/** Same matrix from a dataset-shaped pair of embeddings and ranks. */
inline CategoryDistanceMatrix category_distance_matrix(const Matrix& embeddings, const OrdinalDataset& data,
    CosineDistance kind = CosineDistance::half) {
    return category_distance_matrix(embeddings, data.labels, data.categories, kind);
}

/** Average ranks (1-based, ties share the mean of their positions). */
inline std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

/**
 * Spearman rank correlation. Throws `undefined_correlation` if either
 * sequence is constant.
 */
inline double spearman(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), ErrorCategory::argument, "spearman inputs differ in length");
    detail::require(x.size() >= 2, ErrorCategory::undefined_correlation, "spearman needs at least two points");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    double n = static_cast<double>(x.size());
    double mean = (n + 1) / 2;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        double dx = rx[i] - mean, dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    detail::require(sxx > 0 && syy > 0, ErrorCategory::undefined_correlation, "spearman is undefined for a constant sequence");
    return sxy / std::sqrt(sxx * syy);
}

namespace detail {

inline void check_monotonicity_input(const CategoryDistanceMatrix& matrix) {
    check_category_count(matrix.categories);
    auto n = static_cast<std::size_t>(matrix.categories);
    require(matrix.values.rows() == n && matrix.values.cols() == n, ErrorCategory::argument, "matrix shape does not match its category count");
    double lo = matrix.values(0, 1), hi = lo;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) {
            require(std::abs(matrix.values(r, c) - matrix.values(c, r)) <= 1e-12, ErrorCategory::argument, "matrix is not symmetric");
            lo = std::min(lo, matrix.values(r, c));
            hi = std::max(hi, matrix.values(r, c));
        }
    }
    require(lo != hi, ErrorCategory::undefined_correlation, "rank correlation is undefined for a constant matrix");
}

}

/**
 * Ordinal monotonicity of a category distance matrix, in `[-1, 1]`.
 *
 * Each row of the strict upper triangle, read left to right, and each of
 * its columns, read bottom to top, runs over strictly increasing rank gaps
 * `|r - c|`. The score is the mean Spearman correlation between gap and
 * distance along those lines (lines with fewer than two entries are
 * skipped, and a line of equal distances counts as 0). It is 1 exactly
 * when distance grows with rank gap along every row and column.
 *
 * Throws `unsupported_category_count` for fewer than 3 categories,
 * `argument` for an asymmetric matrix and `undefined_correlation` when
 * every off-diagonal entry is equal.
 */
inline double ordinal_monotonicity_score(const CategoryDistanceMatrix& matrix) {
    detail::check_monotonicity_input(matrix);
    auto n = static_cast<std::size_t>(matrix.categories);

    double total = 0;
    std::size_t lines = 0;
    auto add_line = [&](const std::vector<double>& gaps, const std::vector<double>& dists) {
        if (gaps.size() < 2) {
            return;
        }
        ++lines;
        if (std::adjacent_find(dists.begin(), dists.end(), std::not_equal_to<>()) == dists.end()) {
            return;
        }
        total += spearman(gaps, dists);
    };

    std::vector<double> gaps, dists;
    for (std::size_t r = 0; r < n; ++r) {
        gaps.clear();
        dists.clear();
        for (std::size_t c = r + 1; c < n; ++c) {
            gaps.push_back(static_cast<double>(c - r));
            dists.push_back(matrix.values(r, c));
        }
        add_line(gaps, dists);
    }
    for (std::size_t c = 0; c < n; ++c) {
        gaps.clear();
        dists.clear();
        for (std::size_t r = c; r-- > 0;) {
            gaps.push_back(static_cast<double>(c - r));
            dists.push_back(matrix.values(r, c));
        }
        add_line(gaps, dists);
    }
    return total / static_cast<double>(lines);
}

/**
 * Spearman correlation between `|r - c|` and the distance pooled over the
 * whole strict upper triangle. Because many entries share a rank gap, this
 * stays below 1 even for a perfectly ordered matrix with distinct entries.
 */
inline double pooled_gap_spearman(const CategoryDistanceMatrix& matrix) {
    detail::check_monotonicity_input(matrix);
    auto n = static_cast<std::size_t>(matrix.categories);
    std::vector<double> gaps, dists;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) {
            gaps.push_back(static_cast<double>(c - r));
            dists.push_back(matrix.values(r, c));
        }
    }
    return spearman(gaps, dists);
}

/** CSV with category ranks as row and column headers, full-precision values. */
inline std::string to_csv(const CategoryDistanceMatrix& matrix) {
    std::string out = "rank";
    for (int c = 0; c < matrix.categories; ++c) {
        out += "," + std::to_string(c);
    }
    out += "\n";
    for (int r = 0; r < matrix.categories; ++r) {
        out += std::to_string(r);
        for (int c = 0; c < matrix.categories; ++c) {
            out += "," + text::format_double(matrix(r, c));
        }
        out += "\n";
    }
    return out;
}

}

#endif
