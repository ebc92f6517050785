#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "msts/dataset.hpp"
#include "msts/dtw.hpp"
#include "msts/error.hpp"

namespace msts {

/// Identifies what a cache directory was built from. A cached matrix is only
/// served when every field matches the current dataset and DTW configuration.
struct CacheManifest {
  std::string dataset_fingerprint; // hex of content_fingerprint
  std::size_t n_features = 0;
  std::size_t n_samples = 0;
  std::string cost_function;
  int band = -1;

  bool operator==(const CacheManifest&) const = default;

  static CacheManifest for_dataset(const Dataset& d, const DtwOptions& options) {
    CacheManifest m;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(content_fingerprint(d)));
    m.dataset_fingerprint = hex;
    m.n_features = d.n_features;
    m.n_samples = d.size();
    m.cost_function = DtwOptions::kCostTag;
    m.band = options.band;
    return m;
  }
};

namespace detail {

constexpr char kCacheMagic[8] = {'M', 'S', 'T', 'S', 'D', 'M', '1', '\0'};

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u64le(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

} // namespace detail

/// One distance-matrix file per feature plus a manifest, under one
/// directory. Writes go through a temp file and an atomic rename, so
/// concurrent processes sharing a directory never observe partial files.
///
/// File layout (bit-exact): magic "MSTSDM1\0", u32 LE feature index, u32 LE
/// N, N*N IEEE-754 64-bit LE values row-major, u64 FNV-1a checksum of the
/// payload (everything after the magic).
class DistanceCache {
public:
  /// Opens a cache directory for the given manifest. Creates the directory
  /// and manifest when absent; throws StaleCacheError when a manifest exists
  /// but does not match.
  static DistanceCache open(const std::filesystem::path& dir,
                            const CacheManifest& expected) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
      const CacheManifest found = read_manifest(manifest_path);
      if (!(found == expected))
        throw StaleCacheError(
            "cache at '" + dir.string() +
            "' was built for a different dataset or configuration (fingerprint " +
            found.dataset_fingerprint + ", expected " +
            expected.dataset_fingerprint + ")");
      return DistanceCache(dir, expected);
    }
    DistanceCache cache(dir, expected);
    cache.write_manifest();
    return cache;
  }

  /// Wipes any existing matrix files and manifest, then initializes fresh.
  static DistanceCache reset(const std::filesystem::path& dir,
                             const CacheManifest& manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json" || name.ends_with(".dm"))
        fs::remove(entry.path());
    }
    DistanceCache cache(dir, manifest);
    cache.write_manifest();
    return cache;
  }

  const CacheManifest& manifest() const { return manifest_; }
  const std::filesystem::path& directory() const { return dir_; }

  std::filesystem::path matrix_path(std::size_t feature) const {
    char name[32];
    std::snprintf(name, sizeof name, "feature_%04zu.dm", feature);
    return dir_ / name;
  }

  bool contains(std::size_t feature) const {
    return std::filesystem::exists(matrix_path(feature));
  }

  void store(const DistanceMatrix& m) const {
    std::vector<unsigned char> payload;
    payload.reserve(8 + m.values.size() * 8);
    detail::put_u32le(payload, static_cast<std::uint32_t>(m.feature_index));
    detail::put_u32le(payload, static_cast<std::uint32_t>(m.n));
    for (double v : m.values) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      detail::put_u64le(payload, bits);
    }
    const std::uint64_t checksum = detail::fnv1a(payload.data(), payload.size());

    const std::filesystem::path final_path = matrix_path(m.feature_index);
    const std::filesystem::path tmp_path =
        final_path.string() + ".tmp" + std::to_string(::getpid());
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write '" + tmp_path.string() + "'");
      out.write(detail::kCacheMagic, sizeof detail::kCacheMagic);
      out.write(reinterpret_cast<const char*>(payload.data()),
                static_cast<std::streamsize>(payload.size()));
      std::vector<unsigned char> tail;
      detail::put_u64le(tail, checksum);
      out.write(reinterpret_cast<const char*>(tail.data()),
                static_cast<std::streamsize>(tail.size()));
      if (!out) throw Error("failed writing '" + tmp_path.string() + "'");
    }
    std::filesystem::rename(tmp_path, final_path);
  }

  DistanceMatrix load(std::size_t feature) const {
    const std::filesystem::path path = matrix_path(feature);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptCacheError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof detail::kCacheMagic + 8 + 8 ||
        std::memcmp(bytes.data(), detail::kCacheMagic,
                    sizeof detail::kCacheMagic) != 0)
      throw CorruptCacheError("'" + path.string() +
                              "' is not a distance-matrix file");
    const unsigned char* payload = bytes.data() + sizeof detail::kCacheMagic;
    const std::size_t payload_len = bytes.size() - sizeof detail::kCacheMagic - 8;
    const std::uint64_t stored_checksum =
        detail::get_u64le(bytes.data() + bytes.size() - 8);
    if (detail::fnv1a(payload, payload_len) != stored_checksum)
      throw CorruptCacheError("checksum mismatch in '" + path.string() + "'");

    const std::uint32_t stored_feature = detail::get_u32le(payload);
    const std::uint32_t n = detail::get_u32le(payload + 4);
    if (stored_feature != feature)
      throw CorruptCacheError("'" + path.string() + "' holds feature " +
                              std::to_string(stored_feature) + ", expected " +
                              std::to_string(feature));
    if (n != manifest_.n_samples)
      throw StaleCacheError("'" + path.string() + "' holds a " +
                            std::to_string(n) + "x" + std::to_string(n) +
                            " matrix, manifest says " +
                            std::to_string(manifest_.n_samples));
    if (payload_len != 8 + static_cast<std::size_t>(n) * n * 8)
      throw CorruptCacheError("'" + path.string() + "' is truncated");

    DistanceMatrix m;
    m.feature_index = feature;
    m.n = n;
    m.values.resize(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const std::uint64_t bits = detail::get_u64le(payload + 8 + i * 8);
      std::memcpy(&m.values[i], &bits, sizeof bits);
    }
    return m;
  }

private:
  DistanceCache(std::filesystem::path dir, CacheManifest manifest)
      : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

  static CacheManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorruptCacheError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
      in >> j;
      CacheManifest m;
      m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.n_samples = j.at("n_samples").get<std::size_t>();
      m.cost_function = j.at("cost_function").get<std::string>();
      m.band = j.at("band").get<int>();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw CorruptCacheError("malformed manifest '" + path.string() +
                              "': " + e.what());
    }
  }

  void write_manifest() const {
    const nlohmann::json j = {
        {"dataset_fingerprint", manifest_.dataset_fingerprint},
        {"n_features", manifest_.n_features},
        {"n_samples", manifest_.n_samples},
        {"cost_function", manifest_.cost_function},
        {"band", manifest_.band},
    };
    const std::filesystem::path final_path = dir_ / "manifest.json";
    const std::filesystem::path tmp_path =
        final_path.string() + ".tmp" + std::to_string(::getpid());
    {
      std::ofstream out(tmp_path);
      if (!out) throw Error("cannot write '" + tmp_path.string() + "'");
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp_path, final_path);
  }

  std::filesystem::path dir_;
  CacheManifest manifest_;
};

/// Per-feature build/load statistics from ensure_distance_matrices.
struct CacheFillStats {
  std::size_t loaded = 0;
  std::size_t computed = 0;
  double compute_seconds = 0.0;
};

/// Loads every feature's distance matrix from the cache, computing and
/// storing the missing ones. A stale cache is wiped and rebuilt when
/// reset_stale is set, otherwise the StaleCacheError propagates. Invalid
/// entries (corrupt or truncated) are recomputed. Idempotent: a second call
/// over a complete cache computes nothing.
inline std::vector<DistanceMatrix> ensure_distance_matrices(
    const Dataset& dataset, const std::filesystem::path& dir,
    const DtwOptions& options = {}, CacheFillStats* stats = nullptr,
    bool reset_stale = true,
    const std::function<void(std::size_t, bool)>& progress = {}) {
  const CacheManifest manifest = CacheManifest::for_dataset(dataset, options);
  DistanceCache cache = [&] {
    try {
      return DistanceCache::open(dir, manifest);
    } catch (const StaleCacheError&) {
      if (!reset_stale) throw;
      return DistanceCache::reset(dir, manifest);
    }
  }();

  std::vector<DistanceMatrix> matrices;
  matrices.reserve(dataset.n_features);
  for (std::size_t f = 0; f < dataset.n_features; ++f) {
    bool hit = false;
    if (cache.contains(f)) {
      try {
        matrices.push_back(cache.load(f));
        hit = true;
      } catch (const Error&) {
        // fall through to recompute
      }
    }
    if (!hit) {
      const auto start = std::chrono::steady_clock::now();
      matrices.push_back(build_distance_matrix(dataset, f, options));
      cache.store(matrices.back());
      if (stats)
        stats->compute_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
    }
    if (stats) ++(hit ? stats->loaded : stats->computed);
    if (progress) progress(f, hit);
  }
  return matrices;
}

} // namespace msts
