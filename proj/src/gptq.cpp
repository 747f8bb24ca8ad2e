#include "qtcq/gptq.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace qtcq {

void Hessian::validate() const {
    if (m.rows() != m.cols()) throw DimMismatch("hessian must be square");
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * scale) throw Error("hessian is not symmetric");
    }
    if (m.rows() > 0 && m.diagonal().minCoeff() < 0.0)
        throw Error("hessian diagonal must be non-negative");
}

void DampeningPolicy::validate() const {
    if (!(initial_fraction > 0.0)) throw BadRange("dampening fraction must be > 0");
    if (!(growth > 1.0)) throw BadRange("dampening growth must be > 1");
    if (max_attempts < 1) throw BadRange("dampening needs at least one attempt");
}

Hessian accumulate_hessian(const std::vector<Matrix>& batches) {
    if (batches.empty()) throw EmptyInput("no calibration batches");
    const Index dim = batches.front().cols();
    Hessian h;
    h.m = Matrix::Zero(dim, dim);
    for (const Matrix& x : batches) {
        if (x.cols() != dim)
            throw DimMismatch("calibration batch has " + std::to_string(x.cols()) +
                              " columns, expected " + std::to_string(dim));
        h.m.noalias() += x.transpose() * x;
        h.sample_count += x.rows();
    }
    return h;
}

namespace {

// Attempt loop shared by inversion and the GPTQ sweep: both the factorization
// of H + lambda*I and the factorization of its inverse must go through.
struct DampenedFactor {
    Matrix inverse;
    Matrix upper; // U with U^T U = inverse
    double lambda;
};

DampenedFactor dampened_factor(const Hessian& h, const DampeningPolicy& policy) {
    h.validate();
    policy.validate();
    const Index n = h.dim();
    const double mean_diag = n > 0 ? h.m.diagonal().mean() : 0.0;
    // A zero Hessian has nothing to scale the dampening by; fall back to a
    // unit scale so lambda*I is still factorizable.
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;

    double lambda = policy.initial_fraction * scale;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt, lambda *= policy.growth) {
        Matrix p = h.m;
        p.diagonal().array() += lambda;
        Eigen::LLT<Matrix> llt(p);
        if (llt.info() != Eigen::Success) continue;
        Matrix inv = llt.solve(Matrix::Identity(n, n));
        Eigen::LLT<Matrix> llt_inv(inv);
        if (llt_inv.info() != Eigen::Success) continue;
        return {std::move(inv), Matrix(llt_inv.matrixL().transpose()), lambda};
    }
    throw SingularAfterMaxAttempts("hessian not positive definite after " +
                                   std::to_string(policy.max_attempts) + " dampening attempts");
}

} // namespace

std::pair<Matrix, double> invert_with_dampening(const Hessian& h, const DampeningPolicy& policy) {
    DampenedFactor f = dampened_factor(h, policy);
    return {std::move(f.inverse), f.lambda};
}

GptqResult gptq_quantize_matrix(const Matrix& w, const Hessian& h, const GroupScheme& scheme,
                                int bits, const DampeningPolicy& policy, const MaskMatrix* frozen,
                                GridFit grid_fit, const MseSearchParams& mse) {
    const Index rows = w.rows();
    const Index cols = w.cols();
    if (h.dim() != cols)
        throw DimMismatch("hessian dim " + std::to_string(h.dim()) + " != weight cols " +
                          std::to_string(cols));
    if (frozen && (frozen->rows() != rows || frozen->cols() != cols))
        throw DimMismatch("frozen mask shape does not match the weight matrix");

    GptqResult res;
    res.frozen = frozen ? *frozen : MaskMatrix::Constant(rows, cols, false);

    Matrix work = w;
    if (frozen) work = res.frozen.select(Matrix::Zero(rows, cols), work);

    res.grids = fit_grids(work, scheme, bits, grid_fit, mse);
    const DampenedFactor f = dampened_factor(h, policy);
    const Matrix& u = f.upper;
    res.applied_lambda = f.lambda;

    res.codes = IntMatrix::Zero(rows, cols);
    res.q_estimate = Matrix::Zero(rows, cols);

    for (Index q = 0; q < cols; ++q) {
        const double d = u(q, q);
        for (Index r = 0; r < rows; ++r) {
            if (res.frozen(r, q)) continue;
            const QuantGrid& grid = res.grids.at(r, q);
            const double v = work(r, q);
            const int code = grid.encode_one(v);
            const double qv = grid.decode_one(code);
            res.codes(r, q) = code;
            res.q_estimate(r, q) = qv;
            const double err = (v - qv) / d;
            if (err == 0.0) continue;
            for (Index j = q + 1; j < cols; ++j) {
                if (!res.frozen(r, j)) work(r, j) -= err * u(q, j);
            }
        }
    }

    if (frozen) res.q_estimate = res.frozen.select(w, res.q_estimate);
    return res;
}

Matrix simulate_corrupt(const Matrix& w, const Hessian& h, const GroupScheme& scheme, int bits,
                        const DampeningPolicy& policy, GridFit grid_fit,
                        const MseSearchParams& mse) {
    return gptq_quantize_matrix(w, h, scheme, bits, policy, nullptr, grid_fit, mse).q_estimate;
}

} // namespace qtcq
