#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "ceva/embedding.hpp"

namespace ceva {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

using ConceptVectors = std::map<std::string, EmbeddingVector, std::less<>>;
using ConceptPoints = std::map<std::string, Point2, std::less<>>;

struct Projection2D {
  std::string method;  // "pca" or "external:<name>"
  ConceptPoints coords;
  bool operator==(const Projection2D&) const = default;
};

enum class PcaSolver {
  kAuto,        // covariance when d <= 256, Gram matrix otherwise
  kCovariance,  // eigendecomposition of the d x d scatter matrix
  kGram,        // eigendecomposition of the n x n Gram matrix
};

inline constexpr std::size_t kPcaCovarianceMaxDim = 256;

// Mean-centered data projected onto the top two principal components.
// Components are ordered by descending eigenvalue and signed so that each
// component's largest-magnitude entry is positive; components with
// (numerically) zero variance are zero-filled.
Projection2D pca_project(const ConceptVectors& vectors,
                         PcaSolver solver = PcaSolver::kAuto);

// Out-of-process projection method (t-SNE, UMAP, ...).
class ProjectionProvider {
 public:
  virtual ~ProjectionProvider() = default;
  virtual ConceptPoints project(const ConceptVectors& vectors) = 0;
};

class ProjectionRegistry {
 public:
  void add(std::string name, std::shared_ptr<ProjectionProvider> provider);
  ProjectionProvider* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<ProjectionProvider>, std::less<>>
      providers_;
};

// Dispatches on method ("pca" or "external:<name>") and validates the
// provider output: every input concept present, no extra concepts, all
// coordinates finite (ProtocolError otherwise).
Projection2D project(const ConceptVectors& vectors, std::string_view method,
                     const ProjectionRegistry* registry = nullptr);

}  // namespace ceva
