#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ceva/ontology.hpp"

namespace ceva {

inline constexpr std::size_t kGlyphCurveSamples = 50;

struct CurveSample {
  double t = 0.0;
  double density = 0.0;
  bool operator==(const CurveSample&) const = default;
};

struct SummaryDistribution {
  std::vector<std::size_t> counts;  // one per summary sentence
  std::vector<CurveSample> curve;   // empty for an empty summary
};

struct SectionWeight {
  std::size_t section_index = 0;
  double weight = 0.0;
  bool operator==(const SectionWeight&) const = default;
};

struct ConceptGlyph {
  std::string concept_id;
  std::vector<std::size_t> left_bins;
  std::vector<std::size_t> right_counts;
  std::vector<CurveSample> right_curve;
  std::vector<SectionWeight> section_echo;
};

// Per-section occurrence counts; ArgumentError for an unknown concept.
std::vector<std::size_t> document_histogram(std::string_view concept_id,
                                            const ConceptStatsMap& stats);

// Bandwidth of the summary-side kernel for a summary of n sentences.
double kde_bandwidth(std::size_t summary_sentences);

// Gaussian KDE over occurrence positions. An occurrence in summary sentence
// i sits at t = i + 0.5 on the axis [0, n]; kernels are reflected at both
// ends so the density integrates to one over the axis.
double kde_density(double t, const std::vector<std::size_t>& counts,
                   double bandwidth);

// Counts the concept per summary sentence with the document-side spotting
// rules, and samples the smoothed curve at 50 evenly spaced t in [0, n].
SummaryDistribution summary_distribution(
    std::string_view concept_id, const std::vector<std::string>& summary_sentences,
    const Gazetteer& gaz);

// section_counts / max(section_counts), all zero when the concept is absent.
std::vector<SectionWeight> section_echo(std::string_view concept_id,
                                        const ConceptStatsMap& stats);

ConceptGlyph make_glyph(std::string_view concept_id,
                        const ConceptStatsMap& stats,
                        const std::vector<std::string>& summary_sentences,
                        const Gazetteer& gaz);

}  // namespace ceva
