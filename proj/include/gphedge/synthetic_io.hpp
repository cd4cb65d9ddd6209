#pragma once

// Portable container for synthetic objectives. Layout (all little-endian,
// documented in docs/synthetic_format.md):
//
//   char[8]  magic "GPHSYNTH"
//   u32      version (1)
//   u32      dimension d
//   u64      point count m
//   u64      generator seed
//   f64      signal variance
//   f64      noise variance
//   f64      jitter
//   f64[d]   lengthscales
//   f64[m*d] points, point-major
//   f64[m]   targets y
//   u8       optimum present (0/1)
//   f64      known optimum (NaN when absent)
//   f64[d]   argmax (NaN when absent)
//   u64      FNV-1a checksum of every preceding byte

#include <gphedge/errors.hpp>
#include <gphedge/objectives.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace gphedge {

inline constexpr char kSyntheticMagic[8] = {'G', 'P', 'H', 'S', 'Y', 'N', 'T', 'H'};
inline constexpr std::uint32_t kSyntheticVersion = 1;

namespace detail {

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
            bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<unsigned char> bytes;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<unsigned char>& b) : bytes_(b) {}

    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size())
            throw ArgumentError("synthetic file: truncated");
    }
    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t position() const { return pos_; }

private:
    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

inline std::uint64_t checksum(const unsigned char* p, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

inline std::vector<unsigned char> encode_synthetic(const SyntheticObjective& obj) {
    const GpState& gp = obj.gp();
    const auto d = static_cast<std::uint32_t>(gp.dimension());
    const auto m = static_cast<std::uint64_t>(gp.size());
    detail::ByteWriter w;
    w.raw(kSyntheticMagic, sizeof kSyntheticMagic);
    w.u32(kSyntheticVersion);
    w.u32(d);
    w.u64(m);
    w.u64(obj.seed());
    w.f64(gp.kernel().signal_variance);
    w.f64(gp.noise_variance());
    w.f64(gp.jitter());
    for (std::uint32_t j = 0; j < d; ++j)
        w.f64(gp.kernel().lengthscales[j]);
    for (std::uint64_t i = 0; i < m; ++i)
        for (std::uint32_t j = 0; j < d; ++j)
            w.f64(gp.input_matrix()(j, static_cast<Eigen::Index>(i)));
    for (std::uint64_t i = 0; i < m; ++i)
        w.f64(gp.outputs()[static_cast<Eigen::Index>(i)]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    w.u8(obj.known_optimum() ? 1 : 0);
    w.f64(obj.known_optimum().value_or(nan));
    for (std::uint32_t j = 0; j < d; ++j)
        w.f64(obj.argmax() ? (*obj.argmax())[j] : nan);
    w.u64(detail::checksum(w.bytes.data(), w.bytes.size()));
    return w.bytes;
}

inline SyntheticObjective decode_synthetic(const std::vector<unsigned char>& bytes) {
    detail::ByteReader r(bytes);
    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kSyntheticMagic, sizeof magic) != 0)
        throw ArgumentError("synthetic file: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kSyntheticVersion)
        throw ArgumentError("synthetic file: unsupported version " + std::to_string(version));
    const std::uint32_t d = r.u32();
    const std::uint64_t m = r.u64();
    if (d == 0 || d > 100000 || m > (bytes.size() / 8))
        throw ArgumentError("synthetic file: implausible header");
    const std::uint64_t seed = r.u64();
    KernelParams kernel{Eigen::VectorXd(d), r.f64()};
    const double noise = r.f64();
    const double jitter = r.f64();
    for (std::uint32_t j = 0; j < d; ++j)
        kernel.lengthscales[j] = r.f64();
    std::vector<Point> pts(m, Point(d));
    for (auto& p : pts)
        for (std::uint32_t j = 0; j < d; ++j)
            p[j] = r.f64();
    std::vector<double> y(m);
    for (auto& v : y)
        v = r.f64();
    const bool has_opt = r.u8() != 0;
    const double opt = r.f64();
    Point argmax(d);
    for (std::uint32_t j = 0; j < d; ++j)
        argmax[j] = r.f64();
    const std::size_t body = r.position();
    const std::uint64_t sum = r.u64();
    if (sum != detail::checksum(bytes.data(), body))
        throw ArgumentError("synthetic file: checksum mismatch");
    if (r.position() != bytes.size())
        throw ArgumentError("synthetic file: trailing bytes");

    auto gp = std::make_shared<const GpState>(GpState::fit_with_jitter(pts, y, kernel, noise, jitter));
    return SyntheticObjective(std::move(gp), seed, has_opt ? std::optional<double>(opt) : std::nullopt,
                              has_opt ? std::optional<Point>(argmax) : std::nullopt);
}

inline void save_synthetic(const SyntheticObjective& obj, const std::string& path) {
    const auto bytes = encode_synthetic(obj);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

inline SyntheticObjective load_synthetic(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_synthetic(bytes);
}

} // namespace gphedge
