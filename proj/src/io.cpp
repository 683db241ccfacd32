#include "dfk/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "dfk/errors.hpp"

namespace dfk {
namespace {

constexpr uint64_t kMaxElements = 1ull << 30;  // corrupt-header allocation guard

void put_u8(std::string& out, uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) put_u8(out, static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) put_u8(out, static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, bits);
}

class Reader {
  public:
    Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

    uint8_t u8() { return *take(1); }

    uint32_t u32() {
        const uint8_t* p = take(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
        return v;
    }

    uint64_t u64() {
        const uint8_t* p = take(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
        return v;
    }

    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    void expect_magic(const char* magic) {
        if (bytes_.size() < 4 || std::memcmp(bytes_.data(), magic, 4) != 0)
            throw IoError(IoError::Code::BadMagic, path_ + ": not a " + magic + " file");
        off_ = 4;
    }

    void expect_version(uint8_t version) {
        const uint8_t got = u8();
        if (got != version)
            throw IoError(IoError::Code::VersionMismatch,
                          path_ + ": unsupported version " + std::to_string(got));
    }

    void expect_done() {
        if (off_ != bytes_.size())
            throw IoError(IoError::Code::Malformed, path_ + ": trailing bytes");
    }

    [[noreturn]] void malformed(const std::string& what) {
        throw IoError(IoError::Code::Malformed, path_ + ": " + what);
    }

  private:
    const uint8_t* take(size_t n) {
        if (off_ + n > bytes_.size())
            throw IoError(IoError::Code::Truncated, path_ + ": unexpected end of file");
        const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes_.data()) + off_;
        off_ += n;
        return p;
    }

    std::string bytes_;
    std::string path_;
    size_t off_ = 0;
};

Reader open_reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Code::FileAccess, path + ": cannot open for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(IoError::Code::FileAccess, path + ": read failed");
    return Reader(std::move(bytes), path);
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Code::FileAccess, path + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(IoError::Code::FileAccess, path + ": write failed");
}

GridField read_grid_body(Reader& r, double* frame_dt) {
    r.expect_version(1);
    const int dim = r.u8();
    const int channels = r.u8();
    const int dtype = r.u8();
    if (dim != 2 && dim != 3) r.malformed("dimension must be 2 or 3");
    if (channels < 1) r.malformed("channel count must be positive");
    if (dtype != 0 && dtype != 1) r.malformed("unknown dtype");
    std::array<uint32_t, 3> dims{1, 1, 1};
    for (int a = 0; a < dim; ++a) dims[static_cast<size_t>(a)] = r.u32();
    Box bbox;
    for (int a = 0; a < dim; ++a) {
        bbox.lo[a] = r.f64();
        bbox.hi[a] = r.f64();
    }
    if (frame_dt) *frame_dt = r.f64();
    uint64_t nodes = 1;
    for (int a = 0; a < dim; ++a) {
        if (dims[static_cast<size_t>(a)] == 0) r.malformed("zero-sized axis");
        nodes *= dims[static_cast<size_t>(a)];
    }
    if (nodes * static_cast<uint64_t>(channels) > kMaxElements) r.malformed("grid too large");
    GridField g = GridField::make(dim, channels, dims, bbox);
    for (double& v : g.data) v = dtype == 1 ? r.f64() : static_cast<double>(r.f32());
    r.expect_done();
    return g;
}

void write_grid_body(std::string& out, const GridField& grid, bool wide, const double* frame_dt) {
    put_u8(out, 1);
    put_u8(out, static_cast<uint8_t>(grid.dim));
    put_u8(out, static_cast<uint8_t>(grid.channels));
    put_u8(out, wide ? 1 : 0);
    for (int a = 0; a < grid.dim; ++a) put_u32(out, grid.dims[static_cast<size_t>(a)]);
    for (int a = 0; a < grid.dim; ++a) {
        put_f64(out, grid.bbox.lo[a]);
        put_f64(out, grid.bbox.hi[a]);
    }
    if (frame_dt) put_f64(out, *frame_dt);
    for (double v : grid.data) {
        if (wide)
            put_f64(out, v);
        else
            put_f32(out, static_cast<float>(v));
    }
}

}  // namespace

GridField read_vfld(const std::string& path) {
    Reader r = open_reader(path);
    r.expect_magic("VFLD");
    return read_grid_body(r, nullptr);
}

void write_vfld(const std::string& path, const GridField& grid, bool wide) {
    std::string out = "VFLD";
    write_grid_body(out, grid, wide, nullptr);
    write_bytes(path, out);
}

ScalarSequence read_sfld(const std::string& path) {
    Reader r = open_reader(path);
    r.expect_magic("SFLD");
    ScalarSequence seq;
    seq.grid = read_grid_body(r, &seq.dt);
    return seq;
}

void write_sfld(const std::string& path, const ScalarSequence& seq, bool wide) {
    std::string out = "SFLD";
    write_grid_body(out, seq.grid, wide, &seq.dt);
    write_bytes(path, out);
}

uint8_t dfkm_type_byte(KernelType type) {
    if (type.kind == KernelKind::DivFree && type.base == ScalarRbf::Wen4) return 0;
    if (type.kind == KernelKind::DivFree && type.base == ScalarRbf::Poly6) return 1;
    if (type.kind == KernelKind::DivFree && type.base == ScalarRbf::Gauss) return 2;
    if (type.kind == KernelKind::CurlKernel && type.base == ScalarRbf::Wen4) return 3;
    if (type.kind == KernelKind::RegularScalar && type.base == ScalarRbf::Wen2) return 4;
    if (type.kind == KernelKind::CurlFree && type.base == ScalarRbf::Wen4) return 5;
    if (type.kind == KernelKind::NegLapScalar && type.base == ScalarRbf::Wen4) return 6;
    throw std::invalid_argument("kernel type has no container mapping");
}

KernelType dfkm_type_from_byte(uint8_t byte) {
    switch (byte) {
        case 0: return {KernelKind::DivFree, ScalarRbf::Wen4};
        case 1: return {KernelKind::DivFree, ScalarRbf::Poly6};
        case 2: return {KernelKind::DivFree, ScalarRbf::Gauss};
        case 3: return {KernelKind::CurlKernel, ScalarRbf::Wen4};
        case 4: return {KernelKind::RegularScalar, ScalarRbf::Wen2};
        case 5: return {KernelKind::CurlFree, ScalarRbf::Wen4};
        case 6: return {KernelKind::NegLapScalar, ScalarRbf::Wen4};
        default: throw IoError(IoError::Code::Malformed, "unknown kernel type byte");
    }
}

KernelField read_dfkm(const std::string& path) {
    Reader r = open_reader(path);
    r.expect_magic("DFKM");
    r.expect_version(1);
    KernelField field;
    field.type = dfkm_type_from_byte(r.u8());
    field.dim = r.u8();
    if (field.dim != 2 && field.dim != 3) r.malformed("dimension must be 2 or 3");
    const uint32_t frames = r.u32();
    if (frames == 0) r.malformed("frame count must be positive");
    field.frames = static_cast<int>(frames);
    const uint64_t count = r.u64();
    const uint64_t width = static_cast<uint64_t>(weight_width(field.type, field.dim));
    if (count > kMaxElements || count * frames * width > kMaxElements)
        r.malformed("model too large");
    field.centers.resize(count);
    for (auto& c : field.centers)
        for (int a = 0; a < field.dim; ++a) c[a] = r.f64();
    field.radii.resize(count);
    for (auto& h : field.radii) h = r.f64();
    field.frame_dt = r.f64();
    field.weights.resize(count * frames * width);
    for (auto& w : field.weights) w = r.f64();
    r.expect_done();
    return field;
}

BoundarySet read_boundary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Code::FileAccess, path + ": cannot open for reading");
    BoundarySet set;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        double v[6];
        const int n = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2],
                                  &v[3], &v[4], &v[5]);
        if (n == 4) {
            set.points.push_back(Vec{v[0], v[1], 0.0});
            set.velocities.push_back(Vec{v[2], v[3], 0.0});
        } else if (n == 6) {
            set.points.push_back(Vec{v[0], v[1], v[2]});
            set.velocities.push_back(Vec{v[3], v[4], v[5]});
        } else {
            throw IoError(IoError::Code::Malformed,
                          path + ":" + std::to_string(lineno) + ": expected 4 or 6 columns");
        }
    }
    return set;
}

void write_dfkm(const std::string& path, const KernelField& field) {
    std::string out = "DFKM";
    put_u8(out, 1);
    put_u8(out, dfkm_type_byte(field.type));
    put_u8(out, static_cast<uint8_t>(field.dim));
    put_u32(out, static_cast<uint32_t>(field.frames));
    put_u64(out, field.kernel_count());
    for (const auto& c : field.centers)
        for (int a = 0; a < field.dim; ++a) put_f64(out, c[a]);
    for (double h : field.radii) put_f64(out, h);
    put_f64(out, field.frame_dt);
    for (double w : field.weights) put_f64(out, w);
    write_bytes(path, out);
}

}  // namespace dfk
