#ifndef ATD_TESTS_ORACLES_HPP
#define ATD_TESTS_ORACLES_HPP

// Deliberately naive reference implementations. They share no code with the
// library beyond its plain data types, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atd/embed_net.hpp"
#include "atd/matrix.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline double cosine(const double* a, const double* b, std::size_t d) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < d; ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    double c = ab / (std::sqrt(aa) * std::sqrt(bb));
    return std::max(-1.0, std::min(1.0, c));
}

inline double cosine(const Vec& a, const Vec& b) { return cosine(a.data(), b.data(), a.size()); }

inline double angular(const Vec& a, const Vec& b) { return std::acos(cosine(a, b)) / std::numbers::pi; }

// Sort every other row by (similarity desc, index asc) and take the first k.
inline std::vector<std::size_t> neighbors(const atd::Matrix& ref, const double* query, std::size_t skip, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < ref.rows(); ++j) {
        if (j == skip) {
            continue;
        }
        all.emplace_back(-cosine(&ref.values()[j * ref.cols()], query, ref.cols()), j);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < k; ++t) {
        out.push_back(all[t].second);
    }
    return out;
}

inline double knn_accuracy(const atd::Matrix& emb, const std::vector<int>& labels, std::size_t k) {
    double hits = 0;
    for (std::size_t i = 0; i < emb.rows(); ++i) {
        for (auto j : neighbors(emb, &emb.values()[i * emb.cols()], i, k)) {
            hits += labels[j] == labels[i] ? 1 : 0;
        }
    }
    return hits / static_cast<double>(emb.rows() * k);
}

inline double knn_error(const atd::Matrix& train, const std::vector<int>& train_labels, const atd::Matrix& test,
    const std::vector<int>& test_labels, std::size_t k) {
    std::size_t wrong = 0;
    for (std::size_t q = 0; q < test.rows(); ++q) {
        std::map<int, int> votes;
        for (auto j : neighbors(train, &test.values()[q * test.cols()], static_cast<std::size_t>(-1), k)) {
            ++votes[train_labels[j]];
        }
        int best = -1, best_count = -1;
        for (auto [label, count] : votes) {  // ascending label, so '>' keeps the smallest on ties
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        }
        wrong += best != test_labels[q];
    }
    return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

// All ordered pairs (i, j), i != j, binned by label pair; diagonal bins then
// hold each distinct pair twice, which leaves the mean unchanged.
inline atd::Matrix category_matrix(const atd::Matrix& emb, const std::vector<int>& labels, int categories, double scale = 0.5) {
    auto n = static_cast<std::size_t>(categories);
    atd::Matrix sum(n, n), count(n, n);
    for (std::size_t i = 0; i < emb.rows(); ++i) {
        for (std::size_t j = 0; j < emb.rows(); ++j) {
            if (i == j) {
                continue;
            }
            double d = scale * (1 - cosine(&emb.values()[i * emb.cols()], &emb.values()[j * emb.cols()], emb.cols()));
            auto r = static_cast<std::size_t>(labels[i]);
            auto c = static_cast<std::size_t>(labels[j]);
            sum(r, c) += d;
            count(r, c) += 1;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            sum(r, c) /= count(r, c);
        }
    }
    return sum;
}

// Rank = (number smaller) + (number equal + 1) / 2, then Pearson.
inline double spearman(const Vec& x, const Vec& y) {
    auto rank = [](const Vec& v) {
        Vec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            out[i] = less + (equal + 1) / 2;
        }
        return out;
    };
    Vec rx = rank(x), ry = rank(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline bool all_equal(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

inline double monotonicity(const atd::Matrix& m) {
    auto n = m.rows();
    double total = 0;
    int lines = 0;
    auto take = [&](const Vec& gaps, const Vec& d) {
        if (gaps.size() < 2) {
            return;
        }
        ++lines;
        if (!all_equal(d)) {
            total += spearman(gaps, d);
        }
    };
    for (std::size_t r = 0; r < n; ++r) {
        Vec gaps, d;
        for (std::size_t c = r + 1; c < n; ++c) {
            gaps.push_back(static_cast<double>(c - r));
            d.push_back(m(r, c));
        }
        take(gaps, d);
    }
    for (std::size_t c = 0; c < n; ++c) {
        Vec gaps, d;
        for (std::size_t r = 0; r < c; ++r) {
            gaps.push_back(static_cast<double>(c - r));
            d.push_back(m(r, c));
        }
        take(gaps, d);
    }
    return total / lines;
}

// Plain forward pass: dense layers, optional relu, optional normalization.
inline Vec forward(const atd::NetworkParameters& p, const Vec& x) {
    Vec cur = x;
    for (const auto& layer : p.layers) {
        Vec next(layer.outputs());
        for (std::size_t o = 0; o < next.size(); ++o) {
            double s = layer.bias[o];
            for (std::size_t i = 0; i < cur.size(); ++i) {
                s += layer.weights(o, i) * cur[i];
            }
            next[o] = layer.activation == atd::Activation::relu ? std::max(0.0, s) : s;
        }
        cur = next;
    }
    if (p.l2_normalize) {
        double n = 0;
        for (double v : cur) {
            n += v * v;
        }
        n = std::sqrt(n);
        for (double& v : cur) {
            v /= n;
        }
    }
    return cur;
}

// Relu on/off pattern of every hidden unit for one input.
inline std::vector<bool> relu_pattern(const atd::NetworkParameters& p, const Vec& x) {
    std::vector<bool> out;
    Vec cur = x;
    for (const auto& layer : p.layers) {
        Vec next(layer.outputs());
        for (std::size_t o = 0; o < next.size(); ++o) {
            double s = layer.bias[o];
            for (std::size_t i = 0; i < cur.size(); ++i) {
                s += layer.weights(o, i) * cur[i];
            }
            if (layer.activation == atd::Activation::relu) {
                out.push_back(s > 0);
                s = std::max(0.0, s);
            }
            next[o] = s;
        }
        cur = next;
    }
    return out;
}

inline double guarded_distance(double u, double guard) {
    u = std::max(-1.0 + guard, std::min(1.0 - guard, u));
    return std::acos(u) / std::numbers::pi;
}

struct TripletInput {
    Vec xi, xj, xk;
    double yij = 0, yjk = 0;
};

inline double plain_dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// Mean squared-error triplet loss, straight from the definition.
inline double loss(const atd::NetworkParameters& p, const std::vector<TripletInput>& batch, double guard = 1e-7) {
    double total = 0;
    for (const auto& t : batch) {
        Vec zi = forward(p, t.xi), zj = forward(p, t.xj), zk = forward(p, t.xk);
        double eij = t.yij - guarded_distance(plain_dot(zi, zj), guard);
        double ejk = t.yjk - guarded_distance(plain_dot(zj, zk), guard);
        total += eij * eij + ejk * ejk;
    }
    return total / static_cast<double>(batch.size());
}

// Pointers to every parameter in a fixed order: per layer, weights then bias.
inline std::vector<double*> parameter_slots(atd::NetworkParameters& p) {
    std::vector<double*> out;
    for (auto& layer : p.layers) {
        for (auto& w : layer.weights.values()) {
            out.push_back(&w);
        }
        for (auto& b : layer.bias) {
            out.push_back(&b);
        }
    }
    return out;
}

inline std::vector<double> flatten(const atd::NetworkGradients& g) {
    std::vector<double> out;
    for (const auto& layer : g.layers) {
        out.insert(out.end(), layer.weights.values().begin(), layer.weights.values().end());
        out.insert(out.end(), layer.bias.begin(), layer.bias.end());
    }
    return out;
}

struct GradientCheck {
    double max_relative_error = 0;
    std::size_t compared = 0;
    std::size_t skipped_kinks = 0;
};

// Central differences of `loss` against `analytic`. Coordinates whose +h and
// -h perturbations change a relu on/off pattern straddle a kink and are
// skipped. Relative error is |a - n| / max(|a|, |n|), taken as 0 when both
// are exactly zero.
inline GradientCheck check_gradient(atd::NetworkParameters p, const std::vector<TripletInput>& batch,
    const std::vector<double>& analytic, double h = 1e-5) {
    GradientCheck out;
    auto slots = parameter_slots(p);
    auto patterns = [&] {
        std::vector<bool> all;
        for (const auto& t : batch) {
            for (const auto* x : {&t.xi, &t.xj, &t.xk}) {
                auto pat = relu_pattern(p, *x);
                all.insert(all.end(), pat.begin(), pat.end());
            }
        }
        return all;
    };
    for (std::size_t s = 0; s < slots.size(); ++s) {
        double saved = *slots[s];
        *slots[s] = saved + h;
        double up = loss(p, batch);
        auto pat_up = patterns();
        *slots[s] = saved - h;
        double down = loss(p, batch);
        auto pat_down = patterns();
        *slots[s] = saved;
        if (pat_up != pat_down) {
            ++out.skipped_kinks;
            continue;
        }
        double numeric = (up - down) / (2 * h);
        double scale = std::max(std::abs(numeric), std::abs(analytic[s]));
        double rel = scale == 0 ? 0 : std::abs(numeric - analytic[s]) / scale;
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.compared;
    }
    return out;
}

}

#endif
