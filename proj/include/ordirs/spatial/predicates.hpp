#pragma once

#include <string>
#include <vector>

#include "ordirs/dt/types.hpp"

namespace ordirs::spatial {

enum class PredKind {
    LeftOf,
    RightOf,
    Above,
    Below,
    NearerThan,
    FartherThan,
    WithinPx,
    Overlaps,
    NearestK,
    FarthestK,
    LargestK,
};

const char* pred_kind_name(PredKind kind);
/// Returns true and fills `out` when `name` is a predicate keyword.
bool pred_kind_from_name(const std::string& name, PredKind& out);

bool pred_kind_takes_anchor(PredKind kind);  // all but LARGEST_K
bool pred_kind_is_depth(PredKind kind);      // NEARER_THAN / FARTHER_THAN
bool pred_kind_is_top_k(PredKind kind);

struct SpatialPredicate {
    PredKind kind = PredKind::LeftOf;
    double radius = 0.0;         // WITHIN_PX, > 0
    double iou_threshold = 0.0;  // OVERLAPS, (0, 1]; 0 means any overlap
    bool has_threshold = false;  // whether OVERLAPS carried an explicit tau
    std::int64_t k = 0;          // *_K, >= 1
};

/// Evaluates one predicate for a subject instance against an anchor set
/// drawn from the same frame.
///
/// Binary kinds aggregate the anchors: LEFT_OF/RIGHT_OF/ABOVE/BELOW compare
/// the subject centroid against the centroid of the anchors' union mask;
/// NEARER_THAN/FARTHER_THAN compare depth means against the anchors'
/// area-weighted mean (strict inequality). WITHIN_PX tests the distance to
/// the nearest individual anchor centroid. OVERLAPS tests the best mask IoU
/// against the threshold.
///
/// Top-k kinds are set-wise: NEAREST_K/FARTHEST_K rank every frame instance
/// outside the anchor set by centroid distance to the anchor union centroid
/// (anchor members are never members of the result); LARGEST_K ranks all
/// frame instances by mask area. Ties break by instance_id ascending. The
/// return value is the subject's membership in the top k.
///
/// Throws InputError when anchors are empty for a kind that needs them, and
/// CapabilityMissingError when a depth comparison finds an instance without
/// depth statistics.
bool eval_spatial_predicate(const SpatialPredicate& pred,
                            const dt::Instance& subject,
                            const std::vector<const dt::Instance*>& anchors,
                            const dt::DtFrame& frame);

}  // namespace ordirs::spatial
