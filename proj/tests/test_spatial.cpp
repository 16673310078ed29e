#include <cmath>
#include <random>

#include "doctest.h"
#include "ordirs/dt/rle.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/spatial/mask_ops.hpp"
#include "ordirs/spatial/predicates.hpp"
#include "support/oracle.hpp"

using namespace ordirs;
using testsupport::Bits;

namespace {

dt::RleMask mask_of(const Bits& b) { return testsupport::rle_of(b); }

Bits rect_bits(int w, int h, int r0, int c0, int r1, int c1) {
    Bits b(w, h);
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) b.set(r, c, true);
    return b;
}

dt::Instance rect_instance(std::int64_t id, const std::string& label, int w,
                           int h, int r0, int c0, int r1, int c1,
                           double depth_mean = -1.0) {
    dt::Instance inst;
    inst.instance_id = id;
    inst.label = label;
    inst.bbox = {static_cast<double>(c0), static_cast<double>(r0),
                 static_cast<double>(c1), static_cast<double>(r1)};
    inst.det_confidence = 0.9;
    inst.mask_confidence = 1.0;
    inst.mask = mask_of(rect_bits(w, h, r0, c0, r1, c1));
    if (depth_mean >= 0.0)
        inst.depth = dt::DepthStats{depth_mean, 0.0, inst.mask.area()};
    return inst;
}

dt::DtFrame frame_of(int w, int h, std::vector<dt::Instance> insts) {
    dt::DtFrame f;
    f.video_id = "t";
    f.width = w;
    f.height = h;
    f.instances = std::move(insts);
    return f;
}

}  // namespace

TEST_CASE("mask_iou matches the documented 3x3 fixture") {
    Bits a(3, 3);
    for (int r = 0; r < 3; ++r) {
        a.set(r, 0, true);
        a.set(r, 1, true);
    }
    Bits b(3, 3);
    for (int c = 0; c < 3; ++c) {
        b.set(0, c, true);
        b.set(1, c, true);
    }
    CHECK(spatial::mask_iou(mask_of(a), mask_of(b)) == doctest::Approx(0.5));
}

TEST_CASE("mask_iou handles identity, disjointness, emptiness") {
    Bits a = rect_bits(4, 4, 0, 0, 2, 2);
    Bits b = rect_bits(4, 4, 2, 2, 4, 4);
    Bits empty(4, 4);
    CHECK(spatial::mask_iou(mask_of(a), mask_of(a)) == 1.0);
    CHECK(spatial::mask_iou(mask_of(a), mask_of(b)) == 0.0);
    CHECK(spatial::mask_iou(mask_of(empty), mask_of(empty)) == 1.0);
    CHECK(spatial::mask_iou(mask_of(a), mask_of(empty)) == 0.0);
    CHECK_THROWS_AS(
        spatial::mask_iou(mask_of(a), mask_of(rect_bits(3, 3, 0, 0, 1, 1))),
        InputError);
}

TEST_CASE("mask_union identity, additivity, empty input") {
    Bits a = rect_bits(4, 4, 0, 0, 1, 3);
    Bits b = rect_bits(4, 4, 2, 0, 3, 4);
    dt::RleMask u = spatial::mask_union({mask_of(a), mask_of(b)}, 4, 4);
    CHECK(u.area() == 7);
    CHECK(spatial::mask_union({mask_of(a)}, 4, 4) == mask_of(a));
    dt::RleMask zero = spatial::mask_union({}, 4, 4);
    CHECK(zero.area() == 0);
    CHECK(zero.width == 4);
    CHECK(zero.runs == std::vector<std::int64_t>{16});
}

TEST_CASE("centroid matches the documented fixtures") {
    Bits single(3, 3);
    single.set(0, 0, true);
    auto [sx, sy] = spatial::centroid(mask_of(single));
    CHECK(sx == doctest::Approx(0.5));
    CHECK(sy == doctest::Approx(0.5));

    Bits full(2, 2);
    for (auto& v : full.px) v = 1;
    auto [fx, fy] = spatial::centroid(mask_of(full));
    CHECK(fx == doctest::Approx(1.0));
    CHECK(fy == doctest::Approx(1.0));

    Bits pair(3, 1);
    pair.set(0, 0, true);
    pair.set(0, 2, true);
    auto [px, py] = spatial::centroid(mask_of(pair));
    CHECK(px == doctest::Approx(1.5));
    CHECK(py == doctest::Approx(0.5));

    CHECK_THROWS_AS(spatial::centroid(mask_of(Bits(3, 3))), InputError);
}

TEST_CASE("depth stats match the population-std oracle") {
    img::DepthMap d(3, 1);
    d.values = {0.2f, 0.4f, 0.6f};
    Bits all(3, 1);
    for (auto& v : all.px) v = 1;
    dt::DepthStats s = spatial::depth_stats_for_mask(d, mask_of(all));
    CHECK(s.pixel_count == 3);
    CHECK(s.mean == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(s.std == doctest::Approx(0.16329931618554522).epsilon(1e-5));

    img::DepthMap flat(4, 4, 0.5f);
    Bits some = rect_bits(4, 4, 1, 1, 3, 3);
    dt::DepthStats c = spatial::depth_stats_for_mask(flat, mask_of(some));
    CHECK(c.mean == doctest::Approx(0.5));
    CHECK(c.std == doctest::Approx(0.0));

    Bits one(4, 4);
    one.set(2, 2, true);
    dt::DepthStats single = spatial::depth_stats_for_mask(flat, mask_of(one));
    CHECK(single.std == 0.0);
    CHECK(single.pixel_count == 1);

    CHECK_THROWS_AS(spatial::depth_stats_for_mask(flat, mask_of(Bits(4, 4))),
                    InputError);
    CHECK_THROWS_AS(spatial::depth_stats_for_mask(flat, mask_of(Bits(3, 3))),
                    InputError);
}

TEST_CASE("mask algebra agrees with the bitmap oracle on random inputs") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        Bits a = testsupport::random_bits(rng, 32);
        Bits b(a.width, a.height);
        std::bernoulli_distribution bit(0.4);
        for (auto& v : b.px) v = bit(rng) ? 1 : 0;

        dt::RleMask ma = mask_of(a);
        dt::RleMask mb = mask_of(b);

        auto [oi, ou] = testsupport::intersection_union(a, b);
        auto [ri, ru] = spatial::mask_intersection_union(ma, mb);
        CHECK(ri == oi);
        CHECK(ru == ou);
        CHECK(spatial::mask_iou(ma, mb) ==
              doctest::Approx(testsupport::iou(a, b)).epsilon(1e-12));

        dt::RleMask un = spatial::mask_union({ma, mb}, a.width, a.height);
        CHECK(un == mask_of(testsupport::bit_or(a, b)));

        if (ma.area() > 0) {
            auto [ox, oy] = testsupport::centroid(a);
            auto [cx, cy] = spatial::centroid(ma);
            CHECK(cx == doctest::Approx(ox).epsilon(1e-12));
            CHECK(cy == doctest::Approx(oy).epsilon(1e-12));
        }
    }
}

TEST_CASE("mask_union is associative, commutative, idempotent") {
    std::mt19937_64 rng(7);
    Bits a = testsupport::random_bits(rng, 16);
    Bits b(a.width, a.height);
    Bits c(a.width, a.height);
    std::bernoulli_distribution bit(0.5);
    for (auto& v : b.px) v = bit(rng) ? 1 : 0;
    for (auto& v : c.px) v = bit(rng) ? 1 : 0;
    dt::RleMask ma = mask_of(a), mb = mask_of(b), mc = mask_of(c);
    int w = a.width, h = a.height;

    auto u = [&](std::vector<dt::RleMask> ms) {
        return spatial::mask_union(std::move(ms), w, h);
    };
    CHECK(u({ma, mb, mc}) == u({mc, ma, mb}));
    CHECK(u({u({ma, mb}), mc}) == u({ma, u({mb, mc})}));
    CHECK(u({ma, ma}) == ma);
    CHECK(u({ma, mb, mc}).area() <= ma.area() + mb.area() + mc.area());
}

TEST_CASE("directional predicates compare against the anchor union centroid") {
    auto subject = rect_instance(0, "person", 10, 10, 4, 0, 6, 2);
    auto anchor1 = rect_instance(1, "table", 10, 10, 0, 6, 2, 8);
    auto anchor2 = rect_instance(2, "table", 10, 10, 8, 6, 10, 8);
    auto frame = frame_of(10, 10, {subject, anchor1, anchor2});
    std::vector<const dt::Instance*> anchors = {&frame.instances[1],
                                                &frame.instances[2]};

    using spatial::PredKind;
    spatial::SpatialPredicate left{PredKind::LeftOf};
    spatial::SpatialPredicate right{PredKind::RightOf};
    spatial::SpatialPredicate above{PredKind::Above};
    spatial::SpatialPredicate below{PredKind::Below};

    CHECK(spatial::eval_spatial_predicate(left, frame.instances[0], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(right, frame.instances[0],
                                                anchors, frame));
    // Subject centroid y = 5.0 equals the two-anchor union centroid y.
    CHECK_FALSE(spatial::eval_spatial_predicate(above, frame.instances[0],
                                                anchors, frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(below, frame.instances[0],
                                                anchors, frame));

    CHECK_THROWS_AS(
        spatial::eval_spatial_predicate(left, frame.instances[0], {}, frame),
        InputError);
}

TEST_CASE("depth predicates use strict mean comparison and demand depth") {
    auto near = rect_instance(0, "person", 8, 8, 0, 0, 2, 2, 0.3);
    auto anchor = rect_instance(1, "table", 8, 8, 3, 3, 5, 5, 0.7);
    auto far = rect_instance(2, "person", 8, 8, 6, 6, 8, 8, 0.7);
    auto nodepth = rect_instance(3, "person", 8, 8, 6, 0, 8, 2);
    auto frame = frame_of(8, 8, {near, anchor, far, nodepth});
    std::vector<const dt::Instance*> anchors = {&frame.instances[1]};

    using spatial::PredKind;
    spatial::SpatialPredicate nearer{PredKind::NearerThan};
    spatial::SpatialPredicate farther{PredKind::FartherThan};

    CHECK(spatial::eval_spatial_predicate(nearer, frame.instances[0], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(farther, frame.instances[0],
                                                anchors, frame));
    // Equal means: strictly nearer and strictly farther are both false.
    CHECK_FALSE(spatial::eval_spatial_predicate(nearer, frame.instances[2],
                                                anchors, frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(farther, frame.instances[2],
                                                anchors, frame));
    CHECK_THROWS_AS(spatial::eval_spatial_predicate(
                        nearer, frame.instances[3], anchors, frame),
                    CapabilityMissingError);
}

TEST_CASE("within_px measures distance to the nearest single anchor") {
    auto subject = rect_instance(0, "person", 20, 20, 0, 0, 2, 2);
    auto close = rect_instance(1, "door", 20, 20, 0, 4, 2, 6);
    auto distant = rect_instance(2, "door", 20, 20, 18, 18, 20, 20);
    auto frame = frame_of(20, 20, {subject, close, distant});
    std::vector<const dt::Instance*> anchors = {&frame.instances[1],
                                                &frame.instances[2]};

    spatial::SpatialPredicate within{spatial::PredKind::WithinPx};
    within.radius = 4.0;  // nearest anchor centroid is exactly 4 px away
    CHECK(spatial::eval_spatial_predicate(within, frame.instances[0], anchors,
                                          frame));
    within.radius = 3.9;
    CHECK_FALSE(spatial::eval_spatial_predicate(within, frame.instances[0],
                                                anchors, frame));
}

TEST_CASE("overlaps thresholds on the best anchor iou") {
    auto subject = rect_instance(0, "a", 8, 8, 0, 0, 4, 4);
    auto half = rect_instance(1, "b", 8, 8, 0, 2, 4, 6);
    auto away = rect_instance(2, "c", 8, 8, 6, 6, 8, 8);
    auto frame = frame_of(8, 8, {subject, half, away});

    spatial::SpatialPredicate any{spatial::PredKind::Overlaps};
    std::vector<const dt::Instance*> both = {&frame.instances[1],
                                             &frame.instances[2]};
    CHECK(spatial::eval_spatial_predicate(any, frame.instances[0], both,
                                          frame));
    std::vector<const dt::Instance*> disjoint = {&frame.instances[2]};
    CHECK_FALSE(spatial::eval_spatial_predicate(any, frame.instances[0],
                                                disjoint, frame));

    spatial::SpatialPredicate tight{spatial::PredKind::Overlaps};
    tight.iou_threshold = 0.34;  // the half-overlap iou is 8/24 = 1/3
    tight.has_threshold = true;
    CHECK_FALSE(spatial::eval_spatial_predicate(tight, frame.instances[0],
                                                both, frame));
    tight.iou_threshold = 0.33;
    CHECK(spatial::eval_spatial_predicate(tight, frame.instances[0], both,
                                          frame));
}

TEST_CASE("nearest_k ranks by distance and excludes anchor members") {
    // Anchor at the left edge; persons at distances 3, 5, 9 along the row.
    auto anchor = rect_instance(9, "table", 24, 8, 3, 0, 5, 2);
    auto p3 = rect_instance(0, "person", 24, 8, 3, 3, 5, 5);
    auto p5 = rect_instance(1, "person", 24, 8, 3, 5, 5, 7);
    auto p9 = rect_instance(2, "person", 24, 8, 3, 9, 5, 11);
    auto frame = frame_of(24, 8, {anchor, p3, p5, p9});
    std::vector<const dt::Instance*> anchors = {&frame.instances[0]};

    spatial::SpatialPredicate near1{spatial::PredKind::NearestK};
    near1.k = 1;
    CHECK(spatial::eval_spatial_predicate(near1, frame.instances[1], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(near1, frame.instances[2],
                                                anchors, frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(near1, frame.instances[3],
                                                anchors, frame));
    // The anchor itself is never a member, whatever k is.
    CHECK_FALSE(spatial::eval_spatial_predicate(near1, frame.instances[0],
                                                anchors, frame));

    spatial::SpatialPredicate near2{spatial::PredKind::NearestK};
    near2.k = 2;
    CHECK(spatial::eval_spatial_predicate(near2, frame.instances[2], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(near2, frame.instances[3],
                                                anchors, frame));

    spatial::SpatialPredicate far1{spatial::PredKind::FarthestK};
    far1.k = 1;
    CHECK(spatial::eval_spatial_predicate(far1, frame.instances[3], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(far1, frame.instances[1],
                                                anchors, frame));
}

TEST_CASE("k ranking breaks ties by instance id") {
    // Two persons equidistant from the anchor.
    auto anchor = rect_instance(5, "table", 16, 16, 7, 7, 9, 9);
    auto leftp = rect_instance(1, "person", 16, 16, 7, 3, 9, 5);
    auto rightp = rect_instance(2, "person", 16, 16, 7, 11, 9, 13);
    auto frame = frame_of(16, 16, {anchor, leftp, rightp});
    std::vector<const dt::Instance*> anchors = {&frame.instances[0]};

    spatial::SpatialPredicate near1{spatial::PredKind::NearestK};
    near1.k = 1;
    CHECK(spatial::eval_spatial_predicate(near1, frame.instances[1], anchors,
                                          frame));
    CHECK_FALSE(spatial::eval_spatial_predicate(near1, frame.instances[2],
                                                anchors, frame));
}

TEST_CASE("largest_k ranks every instance by area") {
    auto big = rect_instance(0, "table", 12, 12, 0, 0, 6, 6);
    auto mid = rect_instance(1, "person", 12, 12, 8, 0, 12, 3);
    auto small = rect_instance(2, "person", 12, 12, 10, 10, 12, 12);
    auto frame = frame_of(12, 12, {big, mid, small});

    spatial::SpatialPredicate top1{spatial::PredKind::LargestK};
    top1.k = 1;
    CHECK(spatial::eval_spatial_predicate(top1, frame.instances[0], {}, frame));
    CHECK_FALSE(
        spatial::eval_spatial_predicate(top1, frame.instances[1], {}, frame));

    spatial::SpatialPredicate top2{spatial::PredKind::LargestK};
    top2.k = 2;
    CHECK(spatial::eval_spatial_predicate(top2, frame.instances[1], {}, frame));
    CHECK_FALSE(
        spatial::eval_spatial_predicate(top2, frame.instances[2], {}, frame));
}

TEST_CASE("left_of is asymmetric for distinct centroids") {
    auto a = rect_instance(0, "a", 10, 10, 0, 0, 2, 2);
    auto b = rect_instance(1, "b", 10, 10, 0, 6, 2, 8);
    auto frame = frame_of(10, 10, {a, b});
    spatial::SpatialPredicate left{spatial::PredKind::LeftOf};
    bool ab = spatial::eval_spatial_predicate(
        left, frame.instances[0], {&frame.instances[1]}, frame);
    bool ba = spatial::eval_spatial_predicate(
        left, frame.instances[1], {&frame.instances[0]}, frame);
    CHECK(ab);
    CHECK_FALSE(ba);
}
