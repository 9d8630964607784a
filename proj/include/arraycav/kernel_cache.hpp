#pragma once

#include <functional>
#include <string>

#include "arraycav/confined.hpp"

namespace arraycav {

// 64-bit FNV-1a, lower-case hex.
std::string content_hash(const std::string& bytes);

// Text header (kind, N, parameters) then row-major (re, im) float64 pairs, little-endian.
std::string serialize_kernel(const DisplacementKernel& k);
DisplacementKernel deserialize_kernel(const std::string& bytes);

void save_kernel(const std::string& path, const DisplacementKernel& k);
DisplacementKernel load_kernel(const std::string& path);

struct CacheRecord {
    std::string key;
    std::string path;          // empty when caching is disabled
    std::string content_hash;  // hash of the serialized kernel
    bool hit = false;
};

// Looks in $ARRAYCAV_CACHE_DIR for a kernel keyed by the hash of `params`; builds and stores it otherwise.
DisplacementKernel load_or_build(const std::string& params, const std::function<DisplacementKernel()>& build,
                                 CacheRecord* record = nullptr);

}  // namespace arraycav
