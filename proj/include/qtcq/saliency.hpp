#pragma once

// Per-weight saliency scoring and top-p% outlier selection.
//
// Seven metric variants over the weight W, its loss gradient G and the
// corrupt-model estimate Q(W):
//
//   Weight             |W|
//   SampleFisher       G^2
//   SampleGradient     G                (signed; aggregated before abs)
//   SampleAbsGradient  |G|
//   MSG                |W| * |G|
//   QAL                |G| * |Q(W) - W|
//   TACQ               |W| * |G| * |Q(W) - W|
//
// Scores are computed per calibration sample and averaged; SampleGradient
// averages the signed values first (so contributions can cancel) and takes
// the absolute value afterwards.

#include "qtcq/quant.hpp"
#include "qtcq/types.hpp"

#include <string>
#include <vector>

namespace qtcq {

enum class SaliencyMetric {
    Weight,
    SampleFisher,
    SampleGradient,
    SampleAbsGradient,
    MSG,
    QAL,
    TACQ,
};

bool metric_needs_corrupt_estimate(SaliencyMetric m);
std::string metric_name(SaliencyMetric m);
SaliencyMetric parse_metric(const std::string& name); // throws ConfigError

inline constexpr SaliencyMetric kAllMetrics[] = {
    SaliencyMetric::Weight,       SaliencyMetric::SampleFisher, SaliencyMetric::SampleGradient,
    SaliencyMetric::SampleAbsGradient, SaliencyMetric::MSG,     SaliencyMetric::QAL,
    SaliencyMetric::TACQ,
};

using ScoreMatrix = Matrix;
using OutlierMask = MaskMatrix;

enum class BudgetScope { PerMatrix, Global };

struct OutlierBudget {
    double fraction = 0.0035; // p
    BudgetScope scope = BudgetScope::PerMatrix;

    void validate() const;
};

ScoreMatrix score_sample(const Matrix& w, const Matrix& grad, const Matrix* q_estimate,
                         SaliencyMetric kind);

ScoreMatrix aggregate_scores(const std::vector<ScoreMatrix>& per_sample, SaliencyMetric kind);

// Marks exactly floor(p * n) cells, ranked by (score desc, matrix index asc,
// row-major cell index asc). Global scope pools all matrices before ranking.
OutlierMask select_outliers(const ScoreMatrix& scores, const OutlierBudget& budget);
std::vector<OutlierMask> select_outliers(const std::vector<ScoreMatrix>& scores,
                                         const OutlierBudget& budget);

// Mean |nearest_gridline(w) - w| over masked cells.
double distance_to_gridlines(const Matrix& w, const GridSet& grids, const OutlierMask& mask);

} // namespace qtcq
