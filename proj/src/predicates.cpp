#include "ordirs/spatial/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ordirs/errors.hpp"
#include "ordirs/spatial/mask_ops.hpp"

namespace ordirs::spatial {

const char* pred_kind_name(PredKind kind) {
    switch (kind) {
        case PredKind::LeftOf: return "LEFT_OF";
        case PredKind::RightOf: return "RIGHT_OF";
        case PredKind::Above: return "ABOVE";
        case PredKind::Below: return "BELOW";
        case PredKind::NearerThan: return "NEARER_THAN";
        case PredKind::FartherThan: return "FARTHER_THAN";
        case PredKind::WithinPx: return "WITHIN_PX";
        case PredKind::Overlaps: return "OVERLAPS";
        case PredKind::NearestK: return "NEAREST_K";
        case PredKind::FarthestK: return "FARTHEST_K";
        case PredKind::LargestK: return "LARGEST_K";
    }
    return "?";
}

bool pred_kind_from_name(const std::string& name, PredKind& out) {
    static const std::pair<const char*, PredKind> table[] = {
        {"LEFT_OF", PredKind::LeftOf},       {"RIGHT_OF", PredKind::RightOf},
        {"ABOVE", PredKind::Above},          {"BELOW", PredKind::Below},
        {"NEARER_THAN", PredKind::NearerThan},
        {"FARTHER_THAN", PredKind::FartherThan},
        {"WITHIN_PX", PredKind::WithinPx},   {"OVERLAPS", PredKind::Overlaps},
        {"NEAREST_K", PredKind::NearestK},   {"FARTHEST_K", PredKind::FarthestK},
        {"LARGEST_K", PredKind::LargestK},
    };
    for (const auto& [n, k] : table) {
        if (name == n) {
            out = k;
            return true;
        }
    }
    return false;
}

bool pred_kind_takes_anchor(PredKind kind) {
    return kind != PredKind::LargestK;
}

bool pred_kind_is_depth(PredKind kind) {
    return kind == PredKind::NearerThan || kind == PredKind::FartherThan;
}

bool pred_kind_is_top_k(PredKind kind) {
    return kind == PredKind::NearestK || kind == PredKind::FarthestK ||
           kind == PredKind::LargestK;
}

namespace {

std::pair<double, double> anchor_union_centroid(
    const std::vector<const dt::Instance*>& anchors, const dt::DtFrame& frame) {
    std::vector<dt::RleMask> masks;
    masks.reserve(anchors.size());
    for (const auto* a : anchors) masks.push_back(a->mask);
    dt::RleMask u = mask_union(masks, frame.width, frame.height);
    return centroid(u);
}

double anchor_mean_depth(const std::vector<const dt::Instance*>& anchors) {
    double weighted = 0.0;
    double total = 0.0;
    for (const auto* a : anchors) {
        if (!a->depth) {
            throw CapabilityMissingError(
                "depth predicate: anchor instance " +
                std::to_string(a->instance_id) + " has no depth statistics");
        }
        double w = static_cast<double>(a->depth->pixel_count);
        weighted += a->depth->mean * w;
        total += w;
    }
    return weighted / total;
}

bool contains_instance(const std::vector<const dt::Instance*>& anchors,
                       std::int64_t id) {
    for (const auto* a : anchors) {
        if (a->instance_id == id) return true;
    }
    return false;
}

/// Membership of `subject` in the top k of the given ranking.
/// Entries are (key, instance_id); smaller key ranks first.
bool top_k_membership(std::vector<std::pair<double, std::int64_t>> entries,
                      std::int64_t k, std::int64_t subject_id) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return a.second < b.second;
              });
    std::int64_t limit = std::min<std::int64_t>(
        k, static_cast<std::int64_t>(entries.size()));
    for (std::int64_t i = 0; i < limit; ++i) {
        if (entries[static_cast<std::size_t>(i)].second == subject_id) {
            return true;
        }
    }
    return false;
}

}  // namespace

bool eval_spatial_predicate(const SpatialPredicate& pred,
                            const dt::Instance& subject,
                            const std::vector<const dt::Instance*>& anchors,
                            const dt::DtFrame& frame) {
    if (pred_kind_takes_anchor(pred.kind) && anchors.empty()) {
        throw InputError(std::string(pred_kind_name(pred.kind)) +
                         ": anchor set must be non-empty");
    }

    switch (pred.kind) {
        case PredKind::LeftOf:
        case PredKind::RightOf:
        case PredKind::Above:
        case PredKind::Below: {
            auto [sx, sy] = centroid(subject.mask);
            auto [ax, ay] = anchor_union_centroid(anchors, frame);
            switch (pred.kind) {
                case PredKind::LeftOf: return sx < ax;
                case PredKind::RightOf: return sx > ax;
                case PredKind::Above: return sy < ay;
                default: return sy > ay;
            }
        }

        case PredKind::NearerThan:
        case PredKind::FartherThan: {
            if (!subject.depth) {
                throw CapabilityMissingError(
                    "depth predicate: subject instance " +
                    std::to_string(subject.instance_id) +
                    " has no depth statistics");
            }
            double anchor_depth = anchor_mean_depth(anchors);
            return pred.kind == PredKind::NearerThan
                       ? subject.depth->mean < anchor_depth
                       : subject.depth->mean > anchor_depth;
        }

        case PredKind::WithinPx: {
            auto [sx, sy] = centroid(subject.mask);
            double best = std::numeric_limits<double>::infinity();
            for (const auto* a : anchors) {
                auto [ax, ay] = centroid(a->mask);
                best = std::min(best, std::hypot(sx - ax, sy - ay));
            }
            return best <= pred.radius;
        }

        case PredKind::Overlaps: {
            double best = 0.0;
            for (const auto* a : anchors) {
                best = std::max(best, mask_iou(subject.mask, a->mask));
            }
            return best > pred.iou_threshold;
        }

        case PredKind::NearestK:
        case PredKind::FarthestK: {
            if (contains_instance(anchors, subject.instance_id)) return false;
            auto [ax, ay] = anchor_union_centroid(anchors, frame);
            std::vector<std::pair<double, std::int64_t>> entries;
            for (const auto& inst : frame.instances) {
                if (contains_instance(anchors, inst.instance_id)) continue;
                auto [cx, cy] = centroid(inst.mask);
                double dist = std::hypot(cx - ax, cy - ay);
                entries.emplace_back(
                    pred.kind == PredKind::NearestK ? dist : -dist,
                    inst.instance_id);
            }
            return top_k_membership(std::move(entries), pred.k,
                                    subject.instance_id);
        }

        case PredKind::LargestK: {
            std::vector<std::pair<double, std::int64_t>> entries;
            for (const auto& inst : frame.instances) {
                entries.emplace_back(-static_cast<double>(inst.mask.area()),
                                     inst.instance_id);
            }
            return top_k_membership(std::move(entries), pred.k,
                                    subject.instance_id);
        }
    }
    return false;
}

}  // namespace ordirs::spatial
