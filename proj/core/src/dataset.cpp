// SPDX-License-Identifier: Apache-2.0
#include "nfrm/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr char kMagic[4] = {'N', 'F', 'C', 'M'};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void vec(const Vec2& v)
    {
        f64(v.x);
        f64(v.y);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    Vec2 vec()
    {
        const double x = f64();
        return {x, f64()};
    }
    std::size_t remaining() const { return in_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n)
            throw Error(ErrorCode::truncated_payload, "dataset header truncated at byte " + std::to_string(pos_) +
                                                          " (file has " + std::to_string(in_.size()) + " bytes)");
    }

    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_dataset(const MeasurementSet& set)
{
    set.validate();
    const auto& plan = set.plan;
    Writer w;
    for (char c : kMagic)
        w.u8(static_cast<std::uint8_t>(c));
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(plan.measurement_count()));
    w.u32(static_cast<std::uint32_t>(plan.rx_count()));
    w.u32(static_cast<std::uint32_t>(plan.tx_count()));
    w.u32(static_cast<std::uint32_t>(set.grid.num_tones));
    w.vec(plan.tx_ref);
    w.vec(plan.rx_ref);
    for (const auto& p : plan.placements) {
        for (const auto& v : p.tx_positions)
            w.vec(v);
        for (const auto& v : p.rx_positions)
            w.vec(v);
    }
    w.f64(set.grid.center);
    w.f64(set.grid.bandwidth);
    w.u8(set.snr_db ? 1 : 0);
    w.f64(set.snr_db.value_or(0.0));
    w.u64(set.seed);
    w.u8(set.coherent ? 1 : 0);
    for (const auto& r : set.responses)
        for (const auto& v : r.data()) {
            w.f64(v.real());
            w.f64(v.imag());
        }
    return w.take();
}

MeasurementSet decode_dataset(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::bad_magic, "not an NFCM dataset (bad magic)");
    Reader r(bytes);
    for (int i = 0; i < 4; ++i)
        r.u8();
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion)
        throw Error(ErrorCode::version_mismatch, "dataset version " + std::to_string(version) +
                                                     " is not supported (expected " +
                                                     std::to_string(kDatasetVersion) + ")");
    const std::uint32_t k = r.u32();
    const std::uint32_t m = r.u32();
    const std::uint32_t n = r.u32();
    const std::uint32_t f = r.u32();
    if (k == 0 || m == 0 || n == 0 || f < 2)
        throw Error(ErrorCode::dimension, "dataset dimensions K=" + std::to_string(k) + " M=" + std::to_string(m) +
                                              " N=" + std::to_string(n) + " F=" + std::to_string(f) +
                                              " are invalid");
    const std::uint64_t header_positions = 16ULL * k * (m + n);
    if (r.remaining() < header_positions)
        throw Error(ErrorCode::truncated_payload, "dataset header truncated");

    MeasurementSet set;
    set.plan.tx_ref = r.vec();
    set.plan.rx_ref = r.vec();
    set.plan.placements.resize(k);
    for (auto& p : set.plan.placements) {
        p.tx_positions.resize(n);
        p.rx_positions.resize(m);
        for (auto& v : p.tx_positions)
            v = r.vec();
        for (auto& v : p.rx_positions)
            v = r.vec();
    }
    set.grid.center = r.f64();
    set.grid.bandwidth = r.f64();
    set.grid.num_tones = static_cast<int>(f);
    const bool has_snr = r.u8() != 0;
    const double snr = r.f64();
    if (has_snr)
        set.snr_db = snr;
    set.seed = r.u64();
    set.coherent = r.u8() != 0;

    const std::uint64_t expected = 16ULL * k * m * n * f;
    const std::uint64_t actual = r.remaining();
    if (actual < expected)
        throw Error(ErrorCode::truncated_payload, "dataset payload truncated: expected " + std::to_string(expected) +
                                                      " bytes, found " + std::to_string(actual));
    if (actual > expected)
        throw Error(ErrorCode::dimension, "dataset has " + std::to_string(actual - expected) +
                                              " trailing bytes after the declared K*M*N*F payload");

    set.responses.reserve(k);
    for (std::uint32_t kk = 0; kk < k; ++kk) {
        ChannelResponse h(m, n, f);
        for (auto& v : h.data()) {
            const double re = r.f64();
            v = {re, r.f64()};
        }
        set.responses.push_back(std::move(h));
    }
    try {
        set.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::dimension, std::string("dataset is inconsistent: ") + e.what());
    }
    return set;
}

void write_dataset(const MeasurementSet& set, const std::string& path)
{
    const auto bytes = encode_dataset(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

MeasurementSet read_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path + "'");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_dataset(bytes);
}

} // namespace nfrm
