#pragma once

// Channel-wise linear quantizer. A group of weights is mapped onto 2^N
// gridlines (code - z0) * delta with
//
//   delta = (w_max - w_min) / (2^N - 1)
//   z0    = round(-w_min / delta), clamped to [0, 2^N - 1]
//   code  = clip(round(w / delta + z0), 0, 2^N - 1)
//
// Rounding is half-away-from-zero throughout. A constant group degenerates
// to delta = 0; its value is carried in `base` so decoding still recovers it
// (all codes are 0 in that case).

#include "qtcq/types.hpp"

#include <span>
#include <vector>

namespace qtcq {

struct QuantGrid {
    double delta = 0.0; // step size; 0 marks a constant group
    int z0 = 0;         // zero-point, in [0, 2^bits - 1]
    int bits = 8;       // N in {1..8}
    double base = 0.0;  // group constant when delta == 0, else 0

    int levels() const { return 1 << bits; }
    int max_code() const { return levels() - 1; }

    int encode_one(double v) const;
    double decode_one(int code) const; // throws CodeOutOfRange
    double nearest(double v) const { return decode_one(encode_one(v)); }

    // Representable range (lowest / highest gridline).
    double span_lo() const { return base + (0 - z0) * delta; }
    double span_hi() const { return base + (max_code() - z0) * delta; }
};

struct MseSearchParams {
    double shrink_lo = 0.70;
    double shrink_hi = 1.00;
    int steps = 31;
};

QuantGrid fit_grid_minmax(std::span<const double> values, int bits);

// Linear search over shrink factors s of (s*w_min, s*w_max); returns the
// candidate with the least total squared reconstruction error, ties broken
// toward larger s. shrink_lo = shrink_hi = 1, steps = 1 reduces to min-max.
QuantGrid fit_grid_mse(std::span<const double> values, int bits, double shrink_lo,
                       double shrink_hi, int steps);
QuantGrid fit_grid_mse(std::span<const double> values, int bits,
                       const MseSearchParams& p = {});

std::vector<int> encode(std::span<const double> values, const QuantGrid& grid);
std::vector<double> decode(std::span<const int> codes, const QuantGrid& grid);

double nearest_gridline(double value, const QuantGrid& grid);

// --- grouping ------------------------------------------------------------

enum class GroupMode {
    PerChannel, // one grid per matrix row
    Grouped,    // one grid per (row, block of g columns)
};

struct GroupScheme {
    GroupMode mode = GroupMode::PerChannel;
    Index group_size = 0; // g; ignored for per-channel

    void validate(Index cols) const;
    Index groups_per_row(Index cols) const;
};

enum class GridFit { MinMax, Mse };

// All grids of one matrix, addressable by cell.
struct GridSet {
    GroupScheme scheme;
    Index rows = 0;
    Index cols = 0;
    std::vector<QuantGrid> grids; // rows * groups_per_row, row-major

    const QuantGrid& at(Index r, Index c) const;
};

GridSet fit_grids(const Matrix& w, const GroupScheme& scheme, int bits, GridFit fit,
                  const MseSearchParams& mse = {});

// Independent round-to-nearest: fit grids, encode, decode, no compensation.
Matrix rtn_reconstruct(const Matrix& w, const GroupScheme& scheme, int bits, GridFit fit,
                       const MseSearchParams& mse = {});

} // namespace qtcq
