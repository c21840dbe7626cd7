#include "ceva/projection.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ceva/error.hpp"

namespace ceva {
namespace {

// Relative eigenvalue floor below which a component counts as absent.
constexpr double kRankTolerance = 1e-12;
constexpr double kNoiseFloor = 1e-20;

void apply_sign_convention(Eigen::VectorXd& component) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < component.size(); ++i)
    if (std::abs(component(i)) > std::abs(component(arg))) arg = i;
  if (component(arg) < 0) component = -component;
}

}  // namespace

Projection2D pca_project(const ConceptVectors& vectors, PcaSolver solver) {
  if (vectors.empty()) throw ArgumentError("pca: no vectors", "vectors");
  const auto n = static_cast<Eigen::Index>(vectors.size());
  const auto d = static_cast<Eigen::Index>(vectors.begin()->second.dimension());
  if (d == 0) throw ArgumentError("pca: zero-dimensional vectors", "vectors");

  Eigen::MatrixXd x(n, d);
  Eigen::Index row = 0;
  for (const auto& [id, v] : vectors) {
    if (static_cast<Eigen::Index>(v.dimension()) != d)
      throw ArgumentError("pca: vector for " + id + " has dimension " +
                              std::to_string(v.dimension()) + ", expected " +
                              std::to_string(d),
                          "vectors");
    x.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(v.values.data(), d);
  }
  // Variance below this floor is rounding noise from centering.
  const double noise_floor = kNoiseFloor * x.squaredNorm();
  x.rowwise() -= x.colwise().mean();

  if (solver == PcaSolver::kAuto)
    solver = d <= static_cast<Eigen::Index>(kPcaCovarianceMaxDim)
                 ? PcaSolver::kCovariance
                 : PcaSolver::kGram;

  // Unit-length principal directions in data space, descending variance.
  std::vector<Eigen::VectorXd> components;
  std::vector<double> eigenvalues;
  if (solver == PcaSolver::kCovariance) {
    Eigen::MatrixXd scatter = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, d); ++k) {
      eigenvalues.push_back(eig.eigenvalues()(d - 1 - k));
      components.push_back(eig.eigenvectors().col(d - 1 - k));
    }
  } else {
    Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, n); ++k) {
      double lambda = eig.eigenvalues()(n - 1 - k);
      eigenvalues.push_back(lambda);
      Eigen::VectorXd v = x.transpose() * eig.eigenvectors().col(n - 1 - k);
      double norm = v.norm();
      components.push_back(norm > 0 ? Eigen::VectorXd(v / norm)
                                    : Eigen::VectorXd::Zero(d));
    }
  }

  const double top = eigenvalues.empty() ? 0.0 : std::max(eigenvalues[0], 0.0);
  std::vector<Eigen::VectorXd> coords;
  for (std::size_t k = 0; k < 2; ++k) {
    bool present = k < components.size() && top > noise_floor &&
                   eigenvalues[k] > kRankTolerance * top;
    if (!present) {
      coords.push_back(Eigen::VectorXd::Zero(n));
      continue;
    }
    apply_sign_convention(components[k]);
    coords.push_back(x * components[k]);
  }

  Projection2D out;
  out.method = "pca";
  row = 0;
  for (const auto& [id, v] : vectors) {
    out.coords.emplace(id, Point2{coords[0](row), coords[1](row)});
    ++row;
  }
  return out;
}

void ProjectionRegistry::add(std::string name,
                             std::shared_ptr<ProjectionProvider> provider) {
  providers_[std::move(name)] = std::move(provider);
}

ProjectionProvider* ProjectionRegistry::find(std::string_view name) const {
  auto it = providers_.find(name);
  return it == providers_.end() ? nullptr : it->second.get();
}

std::vector<std::string> ProjectionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : providers_) out.push_back(name);
  return out;
}

Projection2D project(const ConceptVectors& vectors, std::string_view method,
                     const ProjectionRegistry* registry) {
  if (method == "pca") return pca_project(vectors);

  constexpr std::string_view kExternal = "external:";
  if (method.substr(0, kExternal.size()) != kExternal)
    throw ArgumentError("unknown projection method '" + std::string(method) +
                            "'",
                        "projection");
  std::string_view name = method.substr(kExternal.size());
  ProjectionProvider* provider = registry ? registry->find(name) : nullptr;
  if (!provider)
    throw ArgumentError("no projection provider registered for '" +
                            std::string(name) + "'",
                        "projection");

  ConceptPoints coords = provider->project(vectors);
  if (coords.size() != vectors.size())
    throw ProtocolError("projection provider '" + std::string(name) +
                        "' returned " + std::to_string(coords.size()) +
                        " points for " + std::to_string(vectors.size()) +
                        " concepts");
  for (const auto& [id, v] : vectors) {
    auto it = coords.find(id);
    if (it == coords.end())
      throw ProtocolError("projection provider '" + std::string(name) +
                          "' omitted concept " + id);
    if (!std::isfinite(it->second.x) || !std::isfinite(it->second.y))
      throw ProtocolError("projection provider '" + std::string(name) +
                          "' returned a non-finite coordinate for " + id);
  }
  return {std::string(method), std::move(coords)};
}

}  // namespace ceva
