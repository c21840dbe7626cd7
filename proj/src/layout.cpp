#include "ceva/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ceva/error.hpp"

namespace ceva {
namespace {

constexpr double kJitter = 1e-6;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct IndexedEdge {
  std::size_t a;
  std::size_t b;
  double strength;
};

// Uniform angle in [0, 2pi) built from raw engine bits so the sequence is
// identical on every standard library.
double next_angle(std::mt19937_64& rng) {
  double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return unit * 2.0 * std::numbers::pi;
}

void separate_coincident(std::vector<Point2>& pos, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      if (pos[i] != pos[j]) continue;
      double angle = next_angle(rng);
      Point2 moved{clamp01(pos[j].x + kJitter * std::cos(angle)),
                   clamp01(pos[j].y + kJitter * std::sin(angle))};
      if (moved == pos[i])
        moved = {clamp01(pos[j].x - kJitter * std::cos(angle)),
                 clamp01(pos[j].y - kJitter * std::sin(angle))};
      pos[j] = moved;
    }
  }
}

}  // namespace

void LayoutConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok)
      throw ArgumentError(std::string("layout config: ") + field + " " + rule,
                          field);
  };
  require(attract_k >= 0 && std::isfinite(attract_k), "attract_k", "must be >= 0");
  require(repulse_k >= 0 && std::isfinite(repulse_k), "repulse_k", "must be >= 0");
  require(anchor_k >= 0 && std::isfinite(anchor_k), "anchor_k", "must be >= 0");
  require(rest_length > 0 && std::isfinite(rest_length), "rest_length", "must be > 0");
  require(step0 > 0 && std::isfinite(step0), "step0", "must be > 0");
  require(cooling > 0 && cooling < 1, "cooling", "must lie in (0, 1)");
  require(epsilon > 0 && std::isfinite(epsilon), "epsilon", "must be > 0");
  require(relevance_blend >= 0 && relevance_blend <= 1, "relevance_blend",
          "must lie in [0, 1]");
}

LayoutState init_layout(const Projection2D& projection) {
  if (projection.coords.empty())
    throw ArgumentError("layout: empty projection", "projection");
  double min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;
  for (const auto& [id, p] : projection.coords) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = 1.0 - 2.0 * kLayoutMargin;
  auto rescale = [span](double v, double lo, double hi) {
    if (!(hi > lo)) return 0.5;
    return kLayoutMargin + span * (v - lo) / (hi - lo);
  };

  LayoutState state;
  for (const auto& [id, p] : projection.coords)
    state.positions.emplace(id, Point2{rescale(p.x, min_x, max_x),
                                       rescale(p.y, min_y, max_y)});
  state.anchors = state.positions;
  return state;
}

LayoutState run_layout(const LayoutState& init, const CooccurrenceGraph& graph,
                       const LayoutConfig& cfg) {
  cfg.validate();
  LayoutState state = init;
  if (state.anchors.empty()) state.anchors = state.positions;
  state.iterations_run = 0;
  state.converged = false;
  state.last_max_displacement = 0.0;

  std::vector<std::string> ids;
  std::vector<Point2> pos;
  std::vector<Point2> anchor;
  for (const auto& [id, p] : state.positions) {
    ids.push_back(id);
    pos.push_back(p);
    auto it = state.anchors.find(id);
    anchor.push_back(it == state.anchors.end() ? p : it->second);
  }
  const std::size_t n = ids.size();
  auto index_of = [&](const std::string& id) -> std::ptrdiff_t {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return (it != ids.end() && *it == id) ? it - ids.begin() : -1;
  };

  std::vector<IndexedEdge> edges;
  for (const auto& [edge, count] : graph.edges()) {
    auto a = index_of(edge.first);
    auto b = index_of(edge.second);
    if (a < 0 || b < 0) continue;
    edges.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                     std::log1p(static_cast<double>(count))});
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Point2> force(n);
  double step = cfg.step0;
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    separate_coincident(pos, rng);
    std::fill(force.begin(), force.end(), Point2{});

    for (const auto& e : edges) {
      double dx = pos[e.b].x - pos[e.a].x;
      double dy = pos[e.b].y - pos[e.a].y;
      double dist = std::hypot(dx, dy);
      if (dist == 0.0) continue;
      double f = cfg.attract_k * e.strength * (dist - cfg.rest_length) / dist;
      force[e.a].x += f * dx;
      force[e.a].y += f * dy;
      force[e.b].x -= f * dx;
      force[e.b].y -= f * dy;
    }

    if (cfg.repulse_k > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          double dx = pos[j].x - pos[i].x;
          double dy = pos[j].y - pos[i].y;
          double dist2 = dx * dx + dy * dy;
          if (dist2 == 0.0) continue;
          double dist = std::sqrt(dist2);
          double f = cfg.repulse_k / dist2 / dist;
          force[i].x -= f * dx;
          force[i].y -= f * dy;
          force[j].x += f * dx;
          force[j].y += f * dy;
        }
      }
    }

    double max_disp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fx = force[i].x + cfg.anchor_k * (anchor[i].x - pos[i].x);
      double fy = force[i].y + cfg.anchor_k * (anchor[i].y - pos[i].y);
      double len = std::hypot(fx, fy);
      if (len > step) {
        fx *= step / len;
        fy *= step / len;
      }
      Point2 next{clamp01(pos[i].x + fx), clamp01(pos[i].y + fy)};
      max_disp = std::max(max_disp, std::hypot(next.x - pos[i].x, next.y - pos[i].y));
      pos[i] = next;
    }

    step *= cfg.cooling;
    ++state.iterations_run;
    state.last_max_displacement = max_disp;
    if (max_disp < cfg.epsilon) {
      state.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) state.positions[ids[i]] = pos[i];
  return state;
}

double relevance(std::string_view concept_id,
                 const std::set<std::string, std::less<>>& focus,
                 const ConceptVectors& embeddings,
                 const CooccurrenceGraph& graph, double alpha) {
  if (focus.empty()) throw ArgumentError("focus set is empty", "concepts");
  if (focus.count(concept_id)) return 1.0;

  auto embedding = [&](std::string_view id) -> const EmbeddingVector& {
    auto it = embeddings.find(id);
    if (it == embeddings.end())
      throw ArgumentError("no embedding for concept " + std::string(id),
                          "concepts");
    return it->second;
  };

  const EmbeddingVector& ec = embedding(concept_id);
  double semantic = 0.0;
  double context = 0.0;
  const double w_max = static_cast<double>(graph.max_count());
  for (const auto& f : focus) {
    double cos01 = (cosine(ec.values, embedding(f).values) + 1.0) / 2.0;
    semantic = std::max(semantic, cos01);
    if (w_max > 0)
      context = std::max(
          context, static_cast<double>(graph.count(concept_id, f)) / w_max);
  }
  return std::clamp(alpha * semantic + (1.0 - alpha) * context, 0.0, 1.0);
}

LayoutState focus_on(const LayoutState& state,
                     const std::set<std::string, std::less<>>& focus,
                     const ConceptVectors& embeddings,
                     const CooccurrenceGraph& graph, const LayoutConfig& cfg) {
  cfg.validate();
  if (focus.empty()) throw ArgumentError("focus set is empty", "concepts");
  for (const auto& f : focus)
    if (!state.positions.count(f))
      throw ArgumentError("unknown focus concept " + f, "concepts");

  struct Ranked {
    std::string id;
    double score;
  };
  std::vector<Ranked> rest;
  for (const auto& [id, p] : state.positions) {
    if (focus.count(id)) continue;
    rest.push_back({id, relevance(id, focus, embeddings, graph,
                                  cfg.relevance_blend)});
  }
  std::sort(rest.begin(), rest.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });

  LayoutState out = state;
  out.mode = LayoutMode::kFocus;
  out.focus_set = focus;
  for (const auto& f : focus) out.positions[f].y = kFocusTopY;
  const double band = kRelevanceTopY - kRelevanceBottomY;
  for (std::size_t r = 0; r < rest.size(); ++r) {
    double y = rest.size() == 1
                   ? kRelevanceTopY
                   : kRelevanceTopY - band * static_cast<double>(r) /
                                          static_cast<double>(rest.size() - 1);
    out.positions[rest[r].id].y = y;
  }
  return out;
}

}  // namespace ceva
