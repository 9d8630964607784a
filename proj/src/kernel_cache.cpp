#include "arraycav/kernel_cache.hpp"

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace arraycav {

static_assert(std::endian::native == std::endian::little, "kernel cache assumes a little-endian host");

namespace {

constexpr const char* kMagic = "ARRAYCAV-KERNEL 1\n";

KernelKind kind_from(const std::string& s) {
    if (s == "fs") return KernelKind::fs;
    if (s == "confined") return KernelKind::confined;
    if (s == "projected") return KernelKind::projected;
    throw NumericError("kernel cache: unknown kind '" + s + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw NumericError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string serialize_kernel(const DisplacementKernel& k) {
    std::ostringstream o;
    o.precision(17);
    o << kMagic << "kind=" << to_string(k.kind) << "\nN=" << k.size() << "\nn_side=" << k.n_side << "\na=" << k.a
      << "\ndz_order=" << k.dz_order << "\nrows=" << k.table.rows() << "\ncols=" << k.table.cols()
      << "\nparams=" << k.provenance << "\nend\n";
    std::string out = o.str();
    const auto rows = k.table.rows(), cols = k.table.cols();
    std::string body(static_cast<size_t>(rows * cols) * 16, '\0');
    char* p = body.data();
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = k.table(r, c).real(), im = k.table(r, c).imag();
            std::memcpy(p, &re, 8);
            std::memcpy(p + 8, &im, 8);
            p += 16;
        }
    return out + body;
}

DisplacementKernel deserialize_kernel(const std::string& bytes) {
    const std::string magic = kMagic;
    if (bytes.compare(0, magic.size(), magic) != 0) throw NumericError("kernel cache: bad magic");
    const auto end = bytes.find("\nend\n");
    if (end == std::string::npos) throw NumericError("kernel cache: truncated header");
    std::istringstream hdr(bytes.substr(magic.size(), end - magic.size()));
    std::string line;
    DisplacementKernel k;
    long rows = -1, cols = -1;
    while (std::getline(hdr, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "kind") k.kind = kind_from(val);
        else if (key == "n_side") k.n_side = std::stoi(val);
        else if (key == "a") k.a = std::stod(val);
        else if (key == "dz_order") k.dz_order = std::stoi(val);
        else if (key == "rows") rows = std::stol(val);
        else if (key == "cols") cols = std::stol(val);
        else if (key == "params") k.provenance = val;
    }
    const size_t off = end + 5;
    if (rows != 2 * k.n_side - 1 || cols != rows || bytes.size() - off != static_cast<size_t>(rows * cols) * 16)
        throw NumericError("kernel cache: size mismatch");
    k.table.resize(rows, cols);
    const char* p = bytes.data() + off;
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            double re, im;
            std::memcpy(&re, p, 8);
            std::memcpy(&im, p + 8, 8);
            k.table(r, c) = cplx(re, im);
            p += 16;
        }
    return k;
}

void save_kernel(const std::string& path, const DisplacementKernel& k) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw NumericError("cannot write " + tmp);
        const std::string b = serialize_kernel(k);
        f.write(b.data(), static_cast<std::streamsize>(b.size()));
    }
    std::filesystem::rename(tmp, path);
}

DisplacementKernel load_kernel(const std::string& path) { return deserialize_kernel(read_file(path)); }

DisplacementKernel load_or_build(const std::string& params, const std::function<DisplacementKernel()>& build,
                                 CacheRecord* record) {
    CacheRecord rec;
    rec.key = content_hash(params);
    const char* dir = std::getenv("ARRAYCAV_CACHE_DIR");
    DisplacementKernel k;
    if (dir && *dir) {
        std::filesystem::create_directories(dir);
        rec.path = (std::filesystem::path(dir) / ("kernel_" + rec.key + ".bin")).string();
        if (std::filesystem::exists(rec.path)) {
            const std::string bytes = read_file(rec.path);
            k = deserialize_kernel(bytes);
            rec.hit = true;
            rec.content_hash = content_hash(bytes);
        } else {
            k = build();
            save_kernel(rec.path, k);
            rec.content_hash = content_hash(serialize_kernel(k));
        }
    } else {
        k = build();
        rec.content_hash = content_hash(serialize_kernel(k));
    }
    if (record) *record = rec;
    return k;
}

}  // namespace arraycav
