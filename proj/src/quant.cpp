#include "qtcq/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qtcq {

namespace {

void check_bits(int bits) {
    if (bits < 1 || bits > 8) throw BadRange("bits must be in 1..8, got " + std::to_string(bits));
}

QuantGrid grid_from_extremes(double lo, double hi, int bits) {
    QuantGrid g;
    g.bits = bits;
    if (hi == lo) {
        g.delta = 0.0;
        g.z0 = 0;
        g.base = lo;
        return g;
    }
    g.delta = (hi - lo) / static_cast<double>((1 << bits) - 1);
    const double z = std::round(-lo / g.delta);
    g.z0 = static_cast<int>(std::clamp(z, 0.0, static_cast<double>(g.max_code())));
    g.base = 0.0;
    return g;
}

double total_sq_error(std::span<const double> values, const QuantGrid& g) {
    double err = 0.0;
    for (double v : values) {
        const double d = v - g.nearest(v);
        err += d * d;
    }
    return err;
}

} // namespace

int QuantGrid::encode_one(double v) const {
    if (delta == 0.0) return 0;
    const double t = std::round(v / delta + static_cast<double>(z0));
    if (t <= 0.0) return 0;
    if (t >= static_cast<double>(max_code())) return max_code();
    return static_cast<int>(t);
}

double QuantGrid::decode_one(int code) const {
    if (code < 0 || code > max_code())
        throw CodeOutOfRange("code " + std::to_string(code) + " out of range for " +
                             std::to_string(bits) + "-bit grid");
    return base + static_cast<double>(code - z0) * delta;
}

QuantGrid fit_grid_minmax(std::span<const double> values, int bits) {
    check_bits(bits);
    if (values.empty()) throw EmptyInput("cannot fit a grid to an empty group");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return grid_from_extremes(lo, hi, bits);
}

QuantGrid fit_grid_mse(std::span<const double> values, int bits, double shrink_lo,
                       double shrink_hi, int steps) {
    check_bits(bits);
    if (values.empty()) throw EmptyInput("cannot fit a grid to an empty group");
    if (!(shrink_lo > 0.0) || !(shrink_lo <= shrink_hi) || !(shrink_hi <= 1.0))
        throw BadRange("shrink range must satisfy 0 < lo <= hi <= 1");
    if (steps < 1) throw BadRange("search needs at least one step");

    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return grid_from_extremes(lo, hi, bits);

    QuantGrid best;
    double best_err = std::numeric_limits<double>::infinity();
    // Descend from shrink_hi so the first strict minimum wins ties toward
    // larger s; s = 1 (when shrink_hi = 1) is always a candidate.
    for (int k = 0; k < steps; ++k) {
        const double s = steps == 1
                             ? shrink_hi
                             : shrink_hi - static_cast<double>(k) * (shrink_hi - shrink_lo) /
                                               static_cast<double>(steps - 1);
        const QuantGrid g = grid_from_extremes(s * lo, s * hi, bits);
        const double err = total_sq_error(values, g);
        if (err < best_err) {
            best_err = err;
            best = g;
        }
    }
    return best;
}

QuantGrid fit_grid_mse(std::span<const double> values, int bits, const MseSearchParams& p) {
    return fit_grid_mse(values, bits, p.shrink_lo, p.shrink_hi, p.steps);
}

std::vector<int> encode(std::span<const double> values, const QuantGrid& grid) {
    std::vector<int> codes(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) codes[i] = grid.encode_one(values[i]);
    return codes;
}

std::vector<double> decode(std::span<const int> codes, const QuantGrid& grid) {
    std::vector<double> values(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) values[i] = grid.decode_one(codes[i]);
    return values;
}

double nearest_gridline(double value, const QuantGrid& grid) {
    return grid.nearest(value);
}

void GroupScheme::validate(Index cols) const {
    if (mode == GroupMode::PerChannel) return;
    if (group_size < 1) throw BadRange("group size must be >= 1");
    if (cols % group_size != 0)
        throw BadRange("group size " + std::to_string(group_size) + " does not divide " +
                       std::to_string(cols) + " columns");
}

Index GroupScheme::groups_per_row(Index cols) const {
    return mode == GroupMode::PerChannel ? 1 : cols / group_size;
}

const QuantGrid& GridSet::at(Index r, Index c) const {
    const Index per_row = scheme.groups_per_row(cols);
    const Index block = scheme.mode == GroupMode::PerChannel ? 0 : c / scheme.group_size;
    return grids[static_cast<std::size_t>(r * per_row + block)];
}

GridSet fit_grids(const Matrix& w, const GroupScheme& scheme, int bits, GridFit fit,
                  const MseSearchParams& mse) {
    check_bits(bits);
    scheme.validate(w.cols());
    GridSet gs;
    gs.scheme = scheme;
    gs.rows = w.rows();
    gs.cols = w.cols();
    const Index per_row = scheme.groups_per_row(w.cols());
    const Index width = scheme.mode == GroupMode::PerChannel ? w.cols() : scheme.group_size;
    gs.grids.reserve(static_cast<std::size_t>(w.rows() * per_row));
    for (Index r = 0; r < w.rows(); ++r) {
        const double* row = w.row(r).data(); // rows are contiguous (row-major)
        for (Index b = 0; b < per_row; ++b) {
            const std::span<const double> group(row + b * width, static_cast<std::size_t>(width));
            gs.grids.push_back(fit == GridFit::MinMax ? fit_grid_minmax(group, bits)
                                                      : fit_grid_mse(group, bits, mse));
        }
    }
    return gs;
}

Matrix rtn_reconstruct(const Matrix& w, const GroupScheme& scheme, int bits, GridFit fit,
                       const MseSearchParams& mse) {
    const GridSet gs = fit_grids(w, scheme, bits, fit, mse);
    Matrix out(w.rows(), w.cols());
    for (Index r = 0; r < w.rows(); ++r)
        for (Index c = 0; c < w.cols(); ++c) out(r, c) = gs.at(r, c).nearest(w(r, c));
    return out;
}

} // namespace qtcq
