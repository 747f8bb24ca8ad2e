#include "qtcq/tensor_io.hpp"

#include "wire.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace qtcq {

namespace {

constexpr std::uint32_t kVersion = 1;
const char kMagic[4] = {'Q', 'T', 'S', 'R'};

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoFailure("read error on " + path);
    return bytes;
}

} // namespace

Matrix read_tensor(const std::string& path) {
    const auto bytes = slurp(path);
    wire::Reader r(bytes);
    try {
        char magic[4];
        for (char& c : magic) c = static_cast<char>(r.u8());
        if (std::memcmp(magic, kMagic, 4) != 0) throw BadMagic(path + ": not a QTSR tensor file");
        const std::uint32_t version = r.u32();
        if (version != kVersion)
            throw UnsupportedVersion(path + ": QTSR version " + std::to_string(version));
        const std::uint8_t dtype = r.u8();
        if (dtype > 1) throw UnsupportedVersion(path + ": unknown dtype code");
        const std::uint8_t ndim = r.u8();
        if (ndim != 2) throw UnsupportedVersion(path + ": only 2-D tensors are supported");
        const std::uint64_t rows = r.u64();
        const std::uint64_t cols = r.u64();

        // Guard the rows*cols product and the Eigen::Index range.
        const std::uint64_t kMaxElems = std::uint64_t{1} << 40;
        if (rows > kMaxElems || cols > kMaxElems || (cols != 0 && rows > kMaxElems / cols))
            throw ShapeOverflow(path + ": tensor shape exceeds addressable size");
        const std::uint64_t count = rows * cols;

        Matrix t(static_cast<Index>(rows), static_cast<Index>(cols));
        double* out = t.data();
        if (dtype == 0) {
            for (std::uint64_t i = 0; i < count; ++i) out[i] = static_cast<double>(r.f32());
        } else {
            for (std::uint64_t i = 0; i < count; ++i) out[i] = r.f64();
        }
        if (r.remaining() != 0) throw IoFailure(path + ": trailing bytes after payload");
        if (count > 0 && !t.allFinite())
            throw NonFiniteValue(path + ": tensor contains NaN or Inf");
        return t;
    } catch (const wire::TruncatedInput&) {
        throw IoFailure(path + ": truncated tensor file");
    }
}

void write_tensor(const std::string& path, const Matrix& t, TensorDType dtype) {
    if (t.size() > 0 && !t.allFinite())
        throw NonFiniteValue("refusing to write non-finite tensor to " + path);

    wire::Writer w;
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(dtype));
    w.u8(2);
    w.u64(static_cast<std::uint64_t>(t.rows()));
    w.u64(static_cast<std::uint64_t>(t.cols()));
    const double* p = t.data();
    if (dtype == TensorDType::Float32) {
        for (Index i = 0; i < t.size(); ++i) w.f32(static_cast<float>(p[i]));
    } else {
        for (Index i = 0; i < t.size(); ++i) w.f64(p[i]);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(w.buf.data()),
              static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw IoFailure("write error on " + path);
}

} // namespace qtcq
