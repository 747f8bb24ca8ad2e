#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qtcq {

// All numerics run in 64-bit; 32-bit appears only as a storage option.
// Row-major so that a channel (row) is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define QTCQ_DEFINE_ERROR(Name)                                                                    \
    struct Name : Error {                                                                          \
        using Error::Error;                                                                        \
    }

// tensor-io
QTCQ_DEFINE_ERROR(BadMagic);
QTCQ_DEFINE_ERROR(UnsupportedVersion);
QTCQ_DEFINE_ERROR(ShapeOverflow);
QTCQ_DEFINE_ERROR(NonFiniteValue);
QTCQ_DEFINE_ERROR(IoFailure);

// uniform-quant
QTCQ_DEFINE_ERROR(EmptyInput);
QTCQ_DEFINE_ERROR(BadRange);
QTCQ_DEFINE_ERROR(CodeOutOfRange);

// gptq / net / saliency
QTCQ_DEFINE_ERROR(DimMismatch);
QTCQ_DEFINE_ERROR(ShapeMismatch);
QTCQ_DEFINE_ERROR(SingularAfterMaxAttempts);
QTCQ_DEFINE_ERROR(IndexOutOfRange);
QTCQ_DEFINE_ERROR(MissingCorruptEstimate);
QTCQ_DEFINE_ERROR(EmptyMask);

// mixed-format / cli
QTCQ_DEFINE_ERROR(CorruptArtifact);
QTCQ_DEFINE_ERROR(ConfigError);

#undef QTCQ_DEFINE_ERROR

} // namespace qtcq
