#pragma once

// Column-wise GPTQ quantization with per-row error compensation.
//
// The calibration Hessian is H = sum X^T X over sample batches. Quantizing
// the weight w_q of column q displaces the remaining weights of the same row
// by
//
//   dw = -(w_q - Q(w_q)) / [H_F^-1]_qq * (H_F^-1)_{:,q}
//
// where F is the still-unquantized column set. Columns are processed in a
// fixed left-to-right order; the per-step inverses over the trailing
// submatrices come from the upper Cholesky factor U of (H + lambda*I)^-1
// (with U^T U = (H + lambda*I)^-1, [H_F^-1]_qq = U_qq^2 and (H_F^-1)_{0,j} =
// U_qq * U_qj), which is the standard sequential form of the update.
//
// Frozen (outlier) cells are zeroed before grid fitting and skipped during
// the column sweep: they get no code, emit no residual, receive no
// compensation, and are restored to their original values in q_estimate.

#include "qtcq/quant.hpp"
#include "qtcq/types.hpp"

#include <utility>
#include <vector>

namespace qtcq {

struct Hessian {
    Matrix m;                      // dim x dim, symmetric, diag >= 0
    std::int64_t sample_count = 0; // rows accumulated

    Index dim() const { return m.rows(); }
    void validate() const;
};

struct DampeningPolicy {
    double initial_fraction = 0.01; // lambda_0 as a fraction of mean diagonal
    double growth = 10.0;
    int max_attempts = 5;

    void validate() const;
};

Hessian accumulate_hessian(const std::vector<Matrix>& batches);

// Cholesky of H + lambda*I with progressively grown lambda; returns the
// inverse and the lambda that succeeded. Throws SingularAfterMaxAttempts.
std::pair<Matrix, double> invert_with_dampening(const Hessian& h, const DampeningPolicy& policy);

struct GptqResult {
    IntMatrix codes;   // outlier cells carry placeholder code 0
    GridSet grids;     // fitted once, before the column sweep
    Matrix q_estimate; // decode(codes) at quantized cells, originals at frozen cells
    MaskMatrix frozen;
    double applied_lambda = 0.0;
};

GptqResult gptq_quantize_matrix(const Matrix& w, const Hessian& h, const GroupScheme& scheme,
                                int bits, const DampeningPolicy& policy,
                                const MaskMatrix* frozen = nullptr,
                                GridFit grid_fit = GridFit::MinMax,
                                const MseSearchParams& mse = {});

// The "corrupt model": uniform GPTQ quantization with no outliers, used to
// estimate the per-weight displacement Q(W) - W.
Matrix simulate_corrupt(const Matrix& w, const Hessian& h, const GroupScheme& scheme, int bits,
                        const DampeningPolicy& policy, GridFit grid_fit = GridFit::MinMax,
                        const MseSearchParams& mse = {});

} // namespace qtcq
