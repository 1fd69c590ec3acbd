#ifndef ATD_GEOMETRY_HPP
#define ATD_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

/**
 * @file geometry.hpp
 *
 * @brief Cosine similarity, angular distance and angular triangle distance.
 *
 * Distances are reported as fractions of pi: a pairwise angular distance lies
 * in `[0, 1]` and a triangle distance (two consecutive angles) in `[0, 2]`.
 * All functions are pure and thread-safe.
 */

namespace atd {

using VectorView = std::span<const double>;

/** Vectors shorter than this are treated as degenerate and rejected. */
inline constexpr double norm_floor = 1e-12;

/** Dot product, accumulated left to right. */
inline double dot(VectorView a, VectorView b) {
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

inline double squared_norm(VectorView a) {
    return dot(a, a);
}

namespace detail {

inline void check_same_dimension(VectorView a, VectorView b) {
    require(a.size() == b.size(), ErrorCategory::argument,
        "dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    require(!a.empty(), ErrorCategory::argument, "vectors must have at least one dimension");
}

inline void check_nondegenerate(double sq_norm) {
    require(std::isfinite(sq_norm), ErrorCategory::argument, "vector has non-finite entries");
    require(sq_norm >= norm_floor * norm_floor, ErrorCategory::degenerate_vector,
        "vector norm " + std::to_string(std::sqrt(sq_norm)) + " is below the degenerate floor");
}

}

/**
 * Cosine similarity from precomputed parts, clamped to `[-1, 1]`.
 *
 * Normalizing by `sqrt(|a|^2 |b|^2)` rather than `|a| |b|` makes the
 * similarity of a vector with itself exactly 1.
 */
inline double cosine_from_parts(double dot_ab, double sq_norm_a, double sq_norm_b) {
    double denom = std::sqrt(sq_norm_a * sq_norm_b);
    if (!std::isfinite(denom)) {
        denom = std::sqrt(sq_norm_a) * std::sqrt(sq_norm_b);
    }
    return std::clamp(dot_ab / denom, -1.0, 1.0);
}

/**
 * @param a First vector.
 * @param b Second vector, same dimension as `a`.
 * @return Cosine similarity in `[-1, 1]`.
 *
 * Throws `ErrorCategory::argument` on a dimension mismatch and
 * `ErrorCategory::degenerate_vector` if either norm is below `norm_floor`.
 */
inline double cosine_similarity(VectorView a, VectorView b) {
    detail::check_same_dimension(a, b);
    double sa = squared_norm(a), sb = squared_norm(b);
    detail::check_nondegenerate(sa);
    detail::check_nondegenerate(sb);
    return cosine_from_parts(dot(a, b), sa, sb);
}

/** Angle between `a` and `b` in radians, in `[0, pi]`. */
inline double angle(VectorView a, VectorView b) {
    return std::acos(cosine_similarity(a, b));
}

/** Angular distance `arccos(cos(a, b)) / pi`, in `[0, 1]`. */
inline double angular_distance(VectorView a, VectorView b) {
    return angle(a, b) / std::numbers::pi;
}

/**
 * Angular triangle distance of an ordered triple: the angle from `a` to `b`
 * plus the angle from `b` to `c`, as a fraction of pi. Lies in `[0, 2]`.
 */
inline double angular_triangle_distance(VectorView a, VectorView b, VectorView c) {
    return angular_distance(a, b) + angular_distance(b, c);
}

/**
 * @brief Outcome of one metric axiom over a sample of triples.
 */
struct AxiomResult {
    std::string_view name;
    bool passed = true;
    /** Largest violation seen; 0 when the axiom held exactly everywhere. */
    double worst_violation = 0;
    /** Index of the triple with the largest violation. */
    std::size_t worst_index = 0;
};

/**
 * @brief Sampling-based check of the four distance axioms.
 *
 * This is evidence, not a proof: it reports what held on the given triples.
 */
struct AxiomReport {
    std::size_t triples_checked = 0;
    double tolerance = 0;
    AxiomResult nonnegativity{"nonnegativity"};
    AxiomResult identity{"identity"};
    AxiomResult symmetry{"symmetry"};
    AxiomResult triangle_inequality{"triangle_inequality"};

    std::array<const AxiomResult*, 4> axioms() const {
        return {&nonnegativity, &identity, &symmetry, &triangle_inequality};
    }

    bool all_passed() const {
        return nonnegativity.passed && identity.passed && symmetry.passed && triangle_inequality.passed;
    }
};

using VectorTriple = std::array<std::vector<double>, 3>;

namespace detail {

inline void record_violation(AxiomResult& result, double violation, std::size_t index, double tol) {
    if (violation > result.worst_violation) {
        result.worst_violation = violation;
        result.worst_index = index;
    }
    if (violation > tol) {
        result.passed = false;
    }
}

}

/**
 * Check non-negativity, identity, symmetry and the triangle inequality on
 * every triple `(u, v, w)`:
 *
 * - every pairwise and triangle distance is `>= 0`;
 * - `D_A(x, x) <= tol` for each member;
 * - `|D_A(x, y) - D_A(y, x)| <= tol` for each pair, and the triangle
 *   distance of `(u, v, w)` matches that of `(w, v, u)`;
 * - on raw angles, `theta(u, w) <= theta(u, v) + theta(v, w) + tol`.
 *
 * Non-negativity counts any negative value as a violation of its magnitude.
 */
inline AxiomReport check_metric_axioms(std::span<const VectorTriple> samples, double tol = 1e-9) {
    detail::require(!samples.empty(), ErrorCategory::argument, "axiom check needs at least one triple");
    detail::require(tol >= 0, ErrorCategory::argument, "tolerance must be non-negative");

    AxiomReport report;
    report.tolerance = tol;
    report.triples_checked = samples.size();

    for (std::size_t t = 0; t < samples.size(); ++t) {
        const auto& u = samples[t][0];
        const auto& v = samples[t][1];
        const auto& w = samples[t][2];

        const std::array<std::pair<const std::vector<double>*, const std::vector<double>*>, 3> pairs{{
            {&u, &v}, {&v, &w}, {&u, &w}
        }};
        for (const auto& [x, y] : pairs) {
            double forward = angular_distance(*x, *y);
            double backward = angular_distance(*y, *x);
            detail::record_violation(report.nonnegativity, std::max(0.0, -forward), t, 0.0);
            detail::record_violation(report.symmetry, std::abs(forward - backward), t, tol);
        }

        double triangle_forward = angular_triangle_distance(u, v, w);
        double triangle_backward = angular_triangle_distance(w, v, u);
        detail::record_violation(report.nonnegativity, std::max(0.0, -triangle_forward), t, 0.0);
        detail::record_violation(report.symmetry, std::abs(triangle_forward - triangle_backward), t, tol);

        for (const auto* x : {&u, &v, &w}) {
            detail::record_violation(report.identity, angular_distance(*x, *x), t, tol);
        }

        double excess = angle(u, w) - (angle(u, v) + angle(v, w));
        detail::record_violation(report.triangle_inequality, std::max(0.0, excess), t, tol);
    }

    return report;
}

/**
 * Draw `count` triples of independent unit vectors, each uniform on the
 * sphere in `dim` dimensions.
 */
inline std::vector<VectorTriple> random_unit_triples(std::size_t count, std::size_t dim, Rng& rng) {
    detail::require(dim >= 1, ErrorCategory::argument, "dimension must be positive");
    std::vector<VectorTriple> out(count);
    for (auto& triple : out) {
        for (auto& vec : triple) {
            vec.resize(dim);
            double sq = 0;
            do {
                for (auto& x : vec) {
                    x = rng.normal();
                }
                sq = squared_norm(vec);
            } while (sq < 1e-12);
            double scale = 1.0 / std::sqrt(sq);
            for (auto& x : vec) {
                x *= scale;
            }
        }
    }
    return out;
}

}

#endif
