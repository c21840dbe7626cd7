#include "ceva/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ceva/error.hpp"

namespace ceva {
namespace {

const ConceptStats& stats_for(std::string_view concept_id,
                              const ConceptStatsMap& stats) {
  auto it = stats.find(concept_id);
  if (it == stats.end())
    throw ArgumentError("concept " + std::string(concept_id) +
                            " does not occur in the document",
                        "concept_id");
  return it->second;
}

double gaussian(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

std::vector<std::size_t> document_histogram(std::string_view concept_id,
                                            const ConceptStatsMap& stats) {
  return stats_for(concept_id, stats).section_counts;
}

double kde_bandwidth(std::size_t summary_sentences) {
  return std::max(0.5, static_cast<double>(summary_sentences) / 10.0);
}

double kde_density(double t, const std::vector<std::size_t>& counts,
                   double bandwidth) {
  const double n = static_cast<double>(counts.size());
  const int reach = 1 + static_cast<int>(std::ceil(8.0 * bandwidth / (2.0 * n)));
  double total = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double c = static_cast<double>(counts[i]);
    const double center = static_cast<double>(i) + 0.5;
    total += c;
    // images under reflection at 0 and n repeat with period 2n; sum them
    // until the kernel is negligible
    for (int k = -reach; k <= reach; ++k) {
      const double shift = 2.0 * n * k;
      sum += c * (gaussian((t - (center + shift)) / bandwidth) +
                  gaussian((t - (shift - center)) / bandwidth));
    }
  }
  if (total == 0.0) return 0.0;
  return sum / (total * bandwidth);
}

SummaryDistribution summary_distribution(
    std::string_view concept_id,
    const std::vector<std::string>& summary_sentences, const Gazetteer& gaz) {
  SummaryDistribution out;
  out.counts.assign(summary_sentences.size(), 0);
  for (std::size_t i = 0; i < summary_sentences.size(); ++i) {
    for (const auto& m : match_tokens(tokenize(summary_sentences[i]), gaz))
      if (m.concept_id == concept_id) ++out.counts[i];
  }
  if (summary_sentences.empty()) return out;

  const double n = static_cast<double>(summary_sentences.size());
  const double h = kde_bandwidth(summary_sentences.size());
  out.curve.reserve(kGlyphCurveSamples);
  for (std::size_t j = 0; j < kGlyphCurveSamples; ++j) {
    double t = n * static_cast<double>(j) /
               static_cast<double>(kGlyphCurveSamples - 1);
    out.curve.push_back({t, kde_density(t, out.counts, h)});
  }
  return out;
}

std::vector<SectionWeight> section_echo(std::string_view concept_id,
                                        const ConceptStatsMap& stats) {
  const auto& counts = stats_for(concept_id, stats).section_counts;
  std::size_t peak = 0;
  for (auto c : counts) peak = std::max(peak, c);
  std::vector<SectionWeight> out;
  out.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    out.push_back({i, peak == 0 ? 0.0
                                : static_cast<double>(counts[i]) /
                                      static_cast<double>(peak)});
  return out;
}

ConceptGlyph make_glyph(std::string_view concept_id,
                        const ConceptStatsMap& stats,
                        const std::vector<std::string>& summary_sentences,
                        const Gazetteer& gaz) {
  ConceptGlyph g;
  g.concept_id = std::string(concept_id);
  g.left_bins = document_histogram(concept_id, stats);
  auto dist = summary_distribution(concept_id, summary_sentences, gaz);
  g.right_counts = std::move(dist.counts);
  g.right_curve = std::move(dist.curve);
  g.section_echo = section_echo(concept_id, stats);
  return g;
}

}  // namespace ceva
