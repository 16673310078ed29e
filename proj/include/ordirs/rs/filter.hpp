#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ordirs/spatial/predicates.hpp"

namespace ordirs::rs {

struct FilterExpr;
using FilterPtr = std::shared_ptr<const FilterExpr>;

/// Disjunction / conjunction of two or more operands.
struct FilterOr {
    std::vector<FilterPtr> operands;
};
struct FilterAnd {
    std::vector<FilterPtr> operands;
};

struct FilterNot {
    FilterPtr operand;
};

/// Exact match against Instance.label.
struct FilterLabel {
    std::string label;
};

/// Yes/no question judged against the instance description.
struct FilterSem {
    std::string question;
};

/// Spatial predicate; `anchor` names the reference instances and is null
/// only for kinds that take no anchor (LARGEST_K).
struct FilterSpatial {
    spatial::SpatialPredicate pred;
    FilterPtr anchor;
};

struct FilterExpr {
    std::variant<FilterOr, FilterAnd, FilterNot, FilterLabel, FilterSem,
                 FilterSpatial>
        node;
};

/// Grammar (ASCII, whitespace-insensitive between tokens):
///
///   filter  := or
///   or      := and ( "OR" and )*
///   and     := not ( "AND" not )*
///   not     := [ "NOT" ] atom
///   atom    := "(" filter ")" | "LABEL(" string ")" | "SEM(" string ")" | spred
///   spred   := KIND "(" args ")"
///   anchor  := "ANCHOR(" filter ")"
///
/// Argument shapes by kind:
///   LEFT_OF / RIGHT_OF / ABOVE / BELOW /
///   NEARER_THAN / FARTHER_THAN          (anchor)
///   WITHIN_PX                           (radius, anchor)        radius > 0
///   OVERLAPS                            ([tau,] anchor)         0 < tau <= 1
///   NEAREST_K / FARTHEST_K              (k, anchor)             k >= 1
///   LARGEST_K                           (k)
///
/// Strings are double-quoted with \" and \\ escapes. Numeric literals are
/// quantized to six significant digits so the canonical printer round-trips.
/// ANCHOR sub-filters may nest spatial predicates, but ANCHOR depth is
/// capped at 2.
///
/// Throws ParseError (with 1-based line and 0-based column) on syntax,
/// arity, argument-range, or anchor-depth violations.
FilterPtr parse_filter(const std::string& text);

/// Canonical text form; parse_filter(print_filter(f)) yields a tree equal
/// to f under filter_equal.
std::string print_filter(const FilterExpr& expr);
std::string print_filter(const FilterPtr& expr);

/// Deep structural equality.
bool filter_equal(const FilterExpr& a, const FilterExpr& b);
bool filter_equal(const FilterPtr& a, const FilterPtr& b);

/// Maximum ANCHOR nesting depth in the tree (0 when no spatial atom).
int filter_anchor_depth(const FilterExpr& expr);

/// True when the tree contains at least one LABEL or SEM atom
/// (anchor sub-filters included).
bool filter_has_semantic_atom(const FilterExpr& expr);

/// True when the tree contains at least one spatial predicate atom.
bool filter_has_spatial_atom(const FilterExpr& expr);

/// Collects the distinct SEM questions in the tree, anchors included,
/// in first-appearance order.
std::vector<std::string> filter_sem_questions(const FilterExpr& expr);

}  // namespace ordirs::rs
