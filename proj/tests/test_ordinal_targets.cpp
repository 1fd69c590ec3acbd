#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "atd/ordinal_targets.hpp"
#include "support.hpp"

using namespace atd;

namespace {

OrdinalDataset labelled(std::vector<int> labels, int categories) {
    OrdinalDataset d;
    d.categories = categories;
    d.features = Matrix(labels.size(), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        d.features(i, 0) = static_cast<double>(i);
    }
    d.labels = std::move(labels);
    return d;
}

}

TEST(TargetDistance, EvenSteps) {
    EXPECT_DOUBLE_EQ(target_distance(0, 2, 5), 0.5);
    EXPECT_DOUBLE_EQ(target_distance(3, 1, 5), 0.5);
    EXPECT_DOUBLE_EQ(target_distance(0, 4, 5), 1.0);
    EXPECT_DOUBLE_EQ(target_distance(2, 2, 5), 0.0);
    EXPECT_EQ(target_fraction(1, 3, 4), (Fraction{2, 3}));
}

TEST(TargetDistance, RejectsTwoCategories) {
    EXPECT_EQ(category_of([] { target_distance(0, 1, 2); }), ErrorCategory::unsupported_category_count);
}

TEST(TargetDistance, RejectsOutOfRangeRank) {
    EXPECT_EQ(category_of([] { target_distance(0, 5, 5); }), ErrorCategory::argument);
    EXPECT_EQ(category_of([] { target_distance(-1, 0, 5); }), ErrorCategory::argument);
}

TEST(Templates, CountIsTwoCMinusOne) {
    for (int c = 3; c <= 12; ++c) {
        EXPECT_EQ(triplet_templates(c).size(), static_cast<std::size_t>(2 * c - 1));
    }
}

TEST(Templates, FiveCategoriesExact) {
    auto t = triplet_templates(5);
    for (int r = 0; r < 5; ++r) {
        EXPECT_EQ(t[r].kind, TemplateKind::inner);
        EXPECT_EQ(t[r].ranks, (std::array<int, 3>{r, r, r}));
        EXPECT_EQ(t[r].exact_targets[0], (Fraction{0, 1}));
        EXPECT_EQ(t[r].exact_targets[1], (Fraction{0, 1}));
    }
    EXPECT_EQ(t[5].ranks, (std::array<int, 3>{0, 1, 4}));
    EXPECT_EQ(t[5].exact_targets[0], (Fraction{1, 4}));
    EXPECT_EQ(t[5].exact_targets[1], (Fraction{3, 4}));
    EXPECT_EQ(t[6].exact_targets[0], (Fraction{1, 2}));
    EXPECT_EQ(t[6].exact_targets[1], (Fraction{1, 2}));
    EXPECT_EQ(t[7].exact_targets[0], (Fraction{3, 4}));
    EXPECT_EQ(t[7].exact_targets[1], (Fraction{1, 4}));
    EXPECT_EQ(t[8].kind, TemplateKind::full_rotation);
    EXPECT_EQ(t[8].ranks, (std::array<int, 3>{0, 4, 0}));
    EXPECT_EQ(t[8].exact_targets[0], (Fraction{1, 1}));
    EXPECT_EQ(t[8].exact_targets[1], (Fraction{1, 1}));
}

TEST(Templates, ThreeCategoriesHasOneMiddleBoundary) {
    auto t = triplet_templates(3);
    ASSERT_EQ(t.size(), 5u);
    EXPECT_EQ(t[3].ranks, (std::array<int, 3>{0, 1, 2}));
    EXPECT_EQ(t[3].targets(), (std::array<double, 2>{0.5, 0.5}));
}

TEST(Templates, BoundaryLegsSumToHalfTurn) {
    for (int c = 3; c <= 10; ++c) {
        for (const auto& t : triplet_templates(c)) {
            auto sum = Fraction{t.exact_targets[0].numerator + t.exact_targets[1].numerator, c - 1};
            if (t.kind == TemplateKind::boundary) {
                EXPECT_EQ(sum, (Fraction{1, 1}));
            } else if (t.kind == TemplateKind::full_rotation) {
                EXPECT_EQ(sum, (Fraction{2, 1}));
            } else {
                EXPECT_EQ(sum, (Fraction{0, 1}));
            }
        }
    }
}

TEST(Templates, TargetsAreTargetDistances) {
    for (int c = 3; c <= 9; ++c) {
        for (const auto& t : triplet_templates(c)) {
            EXPECT_EQ(t.targets()[0], target_distance(t.ranks[0], t.ranks[1], c));
            EXPECT_EQ(t.targets()[1], target_distance(t.ranks[1], t.ranks[2], c));
        }
    }
}

TEST(Sampler, RowsComeFromTemplateCategories) {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i % 4);
    auto data = labelled(labels, 4);
    auto templates = triplet_templates(4);
    Rng rng(2);
    auto batch = sample_triplet_batch(data, templates, 500, rng);
    ASSERT_EQ(batch.size(), 500u);
    std::set<std::size_t> used;
    for (const auto& trip : batch.triplets) {
        const auto& tmpl = templates[trip.template_index];
        for (int s = 0; s < 3; ++s) {
            EXPECT_EQ(data.labels[trip.rows[s]], tmpl.ranks[s]);
        }
        EXPECT_EQ(trip.targets, tmpl.targets());
        used.insert(trip.template_index);
    }
    EXPECT_EQ(used.size(), templates.size());
}

TEST(Sampler, InputsAreFeatureRows) {
    auto data = labelled({0, 1, 2, 0, 1, 2}, 3);
    Rng rng(4);
    auto batch = sample_triplet_batch(data, triplet_templates(3), 10, rng);
    for (std::size_t t = 0; t < batch.size(); ++t) {
        auto in = batch.inputs(data, t);
        for (int s = 0; s < 3; ++s) {
            EXPECT_EQ(in[s][0], static_cast<double>(batch.triplets[t].rows[s]));
        }
    }
}

TEST(Sampler, DeterministicUnderSeed) {
    auto data = labelled({0, 1, 2, 3, 0, 1, 2, 3, 2}, 4);
    Rng a(77), b(77);
    EXPECT_EQ(sample_triplet_batch(data, triplet_templates(4), 64, a), sample_triplet_batch(data, triplet_templates(4), 64, b));
}

TEST(Sampler, MissingCategoryNamed) {
    auto data = labelled({0, 1, 3, 0, 1, 3}, 4);
    Rng rng(1);
    try {
        sample_triplet_batch(data, triplet_templates(4), 4, rng);
        FAIL() << "expected missing_category";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::missing_category);
        EXPECT_NE(std::string(e.what()).find("rank 2"), std::string::npos);
    }
}

TEST(Sampler, ZeroBatchRejected) {
    auto data = labelled({0, 1, 2}, 3);
    Rng rng(1);
    EXPECT_EQ(category_of([&] { sample_triplet_batch(data, triplet_templates(3), 0, rng); }), ErrorCategory::argument);
}
