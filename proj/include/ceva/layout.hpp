#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ceva/ontology.hpp"
#include "ceva/projection.hpp"

namespace ceva {

struct LayoutConfig {
  double attract_k = 0.02;
  double repulse_k = 0.0005;
  double anchor_k = 0.05;
  double rest_length = 0.05;
  double step0 = 0.05;
  double cooling = 0.95;
  // Zero runs no iterations and returns the initial positions.
  std::size_t max_iters = 500;
  double epsilon = 1e-4;
  std::uint64_t seed = 0;
  double relevance_blend = 0.5;

  // Throws ArgumentError naming the first out-of-range field.
  void validate() const;
};

enum class LayoutMode { kBase, kFocus };

struct LayoutState {
  ConceptPoints positions;  // inside [0,1]^2
  ConceptPoints anchors;    // rescaled projection coordinates
  std::size_t iterations_run = 0;
  bool converged = false;
  double last_max_displacement = 0.0;
  LayoutMode mode = LayoutMode::kBase;
  std::set<std::string, std::less<>> focus_set;

  bool operator==(const LayoutState&) const = default;
};

inline constexpr double kLayoutMargin = 0.05;
inline constexpr double kFocusTopY = 0.95;
inline constexpr double kRelevanceTopY = 0.85;
inline constexpr double kRelevanceBottomY = 0.05;

// Min-max rescales projection coordinates into [0.05, 0.95]^2 (a zero-range
// axis maps to 0.5). The result doubles as the force anchors.
LayoutState init_layout(const Projection2D& projection);

// Force-directed refinement. Per iteration, in concept-id order:
//   edge attraction   attract_k * ln(1 + count) * (dist - rest_length)
//   pair repulsion    repulse_k / dist^2
//   anchor spring     anchor_k * (anchor - pos)
// Each node's displacement is capped at the current step, positions are
// clamped to [0,1]^2, and the step shrinks by `cooling`. Stops once the max
// displacement drops below epsilon or after max_iters. Coincident points are
// first pulled apart by a seeded jitter of length 1e-6. Edges touching
// concepts outside the layout are ignored.
LayoutState run_layout(const LayoutState& init, const CooccurrenceGraph& graph,
                       const LayoutConfig& cfg);

// alpha * max_f cos01(e_c, e_f) + (1 - alpha) * max_f w(c, f) / w_max, and 1
// for members of the focus set.
double relevance(std::string_view concept_id,
                 const std::set<std::string, std::less<>>& focus,
                 const ConceptVectors& embeddings,
                 const CooccurrenceGraph& graph, double alpha);

// Lifts the focus set to y = 0.95 and spreads the remaining concepts over
// [0.05, 0.85] by relevance rank (most relevant highest, ties by concept
// id). x coordinates are untouched.
LayoutState focus_on(const LayoutState& state,
                     const std::set<std::string, std::less<>>& focus,
                     const ConceptVectors& embeddings,
                     const CooccurrenceGraph& graph, const LayoutConfig& cfg);

}  // namespace ceva
