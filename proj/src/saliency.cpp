#include "qtcq/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qtcq {

bool metric_needs_corrupt_estimate(SaliencyMetric m) {
    return m == SaliencyMetric::QAL || m == SaliencyMetric::TACQ;
}

std::string metric_name(SaliencyMetric m) {
    switch (m) {
        case SaliencyMetric::Weight: return "weight";
        case SaliencyMetric::SampleFisher: return "fisher";
        case SaliencyMetric::SampleGradient: return "gradient";
        case SaliencyMetric::SampleAbsGradient: return "abs-gradient";
        case SaliencyMetric::MSG: return "msg";
        case SaliencyMetric::QAL: return "qal";
        case SaliencyMetric::TACQ: return "tacq";
    }
    throw Error("unknown metric");
}

SaliencyMetric parse_metric(const std::string& name) {
    for (SaliencyMetric m : kAllMetrics)
        if (metric_name(m) == name) return m;
    throw ConfigError("unknown saliency metric '" + name + "'");
}

void OutlierBudget::validate() const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw BadRange("outlier fraction must be in [0,1]");
}

ScoreMatrix score_sample(const Matrix& w, const Matrix& grad, const Matrix* q_estimate,
                         SaliencyMetric kind) {
    if (grad.rows() != w.rows() || grad.cols() != w.cols())
        throw ShapeMismatch("gradient shape does not match weights");
    if (metric_needs_corrupt_estimate(kind)) {
        if (!q_estimate) throw MissingCorruptEstimate(metric_name(kind) + " needs Q(W)");
        if (q_estimate->rows() != w.rows() || q_estimate->cols() != w.cols())
            throw ShapeMismatch("corrupt estimate shape does not match weights");
    }
    switch (kind) {
        case SaliencyMetric::Weight: return w.cwiseAbs();
        case SaliencyMetric::SampleFisher: return grad.cwiseProduct(grad);
        case SaliencyMetric::SampleGradient: return grad;
        case SaliencyMetric::SampleAbsGradient: return grad.cwiseAbs();
        case SaliencyMetric::MSG: return w.cwiseAbs().cwiseProduct(grad.cwiseAbs());
        case SaliencyMetric::QAL:
            return grad.cwiseAbs().cwiseProduct((*q_estimate - w).cwiseAbs());
        case SaliencyMetric::TACQ:
            // (|W| * |G|) * |Q(W)-W|, the MSG factorization, evaluated in
            // this exact association so the identity TACQ = MSG .* |Q-W|
            // holds bit-for-bit.
            return Matrix(w.cwiseAbs().cwiseProduct(grad.cwiseAbs()))
                .cwiseProduct((*q_estimate - w).cwiseAbs());
    }
    throw Error("unknown metric");
}

ScoreMatrix aggregate_scores(const std::vector<ScoreMatrix>& per_sample, SaliencyMetric kind) {
    if (per_sample.empty()) throw EmptyInput("no per-sample scores to aggregate");
    const Index rows = per_sample.front().rows();
    const Index cols = per_sample.front().cols();
    Matrix mean = Matrix::Zero(rows, cols);
    for (const ScoreMatrix& s : per_sample) {
        if (s.rows() != rows || s.cols() != cols)
            throw ShapeMismatch("per-sample score shapes differ");
        mean += s;
    }
    mean /= static_cast<double>(per_sample.size());
    if (kind == SaliencyMetric::SampleGradient) mean = mean.cwiseAbs();
    return mean;
}

namespace {

struct Candidate {
    double score;
    std::int32_t matrix;
    Index cell;
};

void check_scores_finite(const ScoreMatrix& s) {
    if (s.size() > 0 && !s.allFinite()) throw NonFiniteValue("scores must be finite for ranking");
}

std::vector<OutlierMask> select_impl(const std::vector<const ScoreMatrix*>& scores,
                                     const OutlierBudget& budget) {
    budget.validate();
    std::vector<OutlierMask> masks;
    masks.reserve(scores.size());
    for (const ScoreMatrix* s : scores) {
        check_scores_finite(*s);
        masks.push_back(OutlierMask::Constant(s->rows(), s->cols(), false));
    }

    const auto rank_order = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.matrix != b.matrix) return a.matrix < b.matrix;
        return a.cell < b.cell;
    };

    if (budget.scope == BudgetScope::Global) {
        std::size_t total = 0;
        for (const ScoreMatrix* s : scores) total += static_cast<std::size_t>(s->size());
        std::vector<Candidate> all;
        all.reserve(total);
        for (std::size_t m = 0; m < scores.size(); ++m) {
            const double* p = scores[m]->data(); // row-major
            for (Index i = 0; i < scores[m]->size(); ++i)
                all.push_back({p[i], static_cast<std::int32_t>(m), i});
        }
        const auto keep = static_cast<std::size_t>(
            std::floor(budget.fraction * static_cast<double>(total)));
        std::sort(all.begin(), all.end(), rank_order);
        for (std::size_t k = 0; k < keep; ++k) {
            const Candidate& c = all[k];
            masks[static_cast<std::size_t>(c.matrix)].data()[c.cell] = true;
        }
    } else {
        for (std::size_t m = 0; m < scores.size(); ++m) {
            const Index n = scores[m]->size();
            std::vector<Candidate> cells;
            cells.reserve(static_cast<std::size_t>(n));
            const double* p = scores[m]->data();
            for (Index i = 0; i < n; ++i) cells.push_back({p[i], 0, i});
            const auto keep = static_cast<std::size_t>(
                std::floor(budget.fraction * static_cast<double>(n)));
            std::sort(cells.begin(), cells.end(), rank_order);
            for (std::size_t k = 0; k < keep; ++k)
                masks[m].data()[cells[k].cell] = true;
        }
    }
    return masks;
}

} // namespace

OutlierMask select_outliers(const ScoreMatrix& scores, const OutlierBudget& budget) {
    return select_impl({&scores}, budget).front();
}

std::vector<OutlierMask> select_outliers(const std::vector<ScoreMatrix>& scores,
                                         const OutlierBudget& budget) {
    std::vector<const ScoreMatrix*> ptrs;
    ptrs.reserve(scores.size());
    for (const ScoreMatrix& s : scores) ptrs.push_back(&s);
    return select_impl(ptrs, budget);
}

double distance_to_gridlines(const Matrix& w, const GridSet& grids, const OutlierMask& mask) {
    if (mask.rows() != w.rows() || mask.cols() != w.cols())
        throw ShapeMismatch("mask shape does not match weights");
    double total = 0.0;
    std::int64_t count = 0;
    for (Index r = 0; r < w.rows(); ++r)
        for (Index c = 0; c < w.cols(); ++c) {
            if (!mask(r, c)) continue;
            total += std::abs(grids.at(r, c).nearest(w(r, c)) - w(r, c));
            ++count;
        }
    if (count == 0) throw EmptyMask("no masked cells to measure");
    return total / static_cast<double>(count);
}

} // namespace qtcq
