#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "drh/core.hpp"
#include "drh/elliptic.hpp"
#include "drh/primes.hpp"
#include "drh/tau.hpp"

// Binary caches. Every file is
//   magic (4 bytes) | header | payload | u64 entry count | u64 FNV-1a of all preceding bytes
// with little-endian integers throughout.
namespace drh::cache {

inline constexpr std::uint8_t kPrimeVersion = 1;

inline std::filesystem::path default_dir() {
  if (const char* env = std::getenv("DRH_CACHE_DIR"); env && *env) return env;
  return ".drh-cache";
}

namespace detail {

inline u64 fnv1a(const std::uint8_t* data, std::size_t n) {
  u64 h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u64le(u64 v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64le(i64 v) { u64le(static_cast<u64>(v)); }
  void i32le(std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void i128le(i128 v) {
    const auto u = static_cast<u128>(v);
    u64le(static_cast<u64>(u));
    u64le(static_cast<u64>(u >> 64));
  }
  // Appends the count/checksum trailer and writes atomically via a temp file.
  void finish(const std::filesystem::path& path, u64 count) {
    u64le(count);
    u64le(fnv1a(buf_.data(), buf_.size()));
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw CacheError("cannot write cache file " + tmp);
      out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw CacheError("short write on cache file " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CacheError("cannot move cache file into place: " + path.string() + ": " + ec.message());
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::filesystem::path& path, std::string_view magic) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CacheError("cannot open cache file " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buf_.size() < magic.size() || std::memcmp(buf_.data(), magic.data(), magic.size()) != 0)
      throw CacheError(path_ + ": bad magic (expected " + std::string(magic) + ")");
    if (buf_.size() < magic.size() + 16) throw CacheError(path_ + ": truncated");
    end_ = buf_.size() - 16;
    pos_ = magic.size();
    u64 stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<u64>(buf_[end_ + 8 + i]) << (8 * i);
    if (stored != fnv1a(buf_.data(), end_ + 8)) throw CacheError(path_ + ": checksum mismatch (truncated or corrupted)");
    for (int i = 0; i < 8; ++i) count_ |= static_cast<u64>(buf_[end_ + i]) << (8 * i);
  }

  u64 count() const noexcept { return count_; }
  std::size_t remaining() const noexcept { return end_ - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw CacheError(path_ + ": truncated payload");
  }
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  u64 u64le() {
    need(8);
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  i64 i64le() { return static_cast<i64>(u64le()); }
  std::int32_t i32le() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return static_cast<std::int32_t>(v);
  }
  i128 i128le() {
    const u64 lo = u64le();
    const u64 hi = u64le();
    return static_cast<i128>((static_cast<u128>(hi) << 64) | lo);
  }
  void expect_end() const {
    if (pos_ != end_) throw CacheError(path_ + ": trailing bytes after payload");
  }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0, end_ = 0;
  u64 count_ = 0;
};

}  // namespace detail

// DRHP: version byte, limit, delta-encoded primes.
inline void write_primes(const std::filesystem::path& path, const PrimeTable& t) {
  detail::Writer w;
  w.bytes("DRHP", 4);
  w.u8(kPrimeVersion);
  w.u64le(t.limit());
  u64 prev = 0;
  for (u64 p : t.primes()) {
    w.u64le(p - prev);
    prev = p;
  }
  w.finish(path, t.size());
}

inline PrimeTable read_primes(const std::filesystem::path& path) {
  detail::Reader r(path, "DRHP");
  if (const auto v = r.u8(); v != kPrimeVersion) throw CacheError(r.path() + ": unsupported version " + std::to_string(v));
  const u64 limit = r.u64le();
  if (r.remaining() != r.count() * 8) throw CacheError(r.path() + ": length does not match entry count");
  std::vector<u64> primes(r.count());
  u64 prev = 0;
  for (auto& p : primes) {
    const u64 d = r.u64le();
    if (d == 0 || prev + d > limit) throw CacheError(r.path() + ": prime stream not ascending within limit");
    p = prev += d;
  }
  r.expect_end();
  return PrimeTable(limit, std::move(primes));
}

// DRHT: N, then tau(1..N) as 128-bit two's complement.
inline void write_tau(const std::filesystem::path& path, const TauTable& t) {
  detail::Writer w;
  w.bytes("DRHT", 4);
  w.u64le(t.N());
  for (i128 v : t.values()) w.i128le(v);
  w.finish(path, t.N());
}

inline TauTable read_tau(const std::filesystem::path& path) {
  detail::Reader r(path, "DRHT");
  const u64 n = r.u64le();
  if (n != r.count() || r.remaining() != n * 16) throw CacheError(r.path() + ": length does not match entry count");
  std::vector<i128> v(n);
  for (auto& x : v) x = r.i128le();
  r.expect_end();
  return TauTable(std::move(v));
}

// DRHE: a, b, limit, then a_p for the primes <= limit in order.
inline void write_ap(const std::filesystem::path& path, const ApTable& t) {
  detail::Writer w;
  w.bytes("DRHE", 4);
  w.i64le(t.a);
  w.i64le(t.b);
  w.u64le(t.limit);
  for (auto v : t.ap) w.i32le(v);
  w.finish(path, t.ap.size());
}

// The primes themselves are not stored; they come from the given table.
inline ApTable read_ap(const std::filesystem::path& path, const PrimeTable& primes) {
  detail::Reader r(path, "DRHE");
  ApTable t;
  t.a = r.i64le();
  t.b = r.i64le();
  t.limit = r.u64le();
  if (r.remaining() != r.count() * 4) throw CacheError(r.path() + ": length does not match entry count");
  if (t.limit > primes.limit()) throw CacheError(r.path() + ": limit exceeds the supplied prime table");
  const std::size_t n = primes.count_upto(static_cast<double>(t.limit));
  if (n != r.count()) throw CacheError(r.path() + ": entry count disagrees with pi(limit)");
  t.primes.assign(primes.primes().begin(), primes.primes().begin() + static_cast<std::ptrdiff_t>(n));
  t.ap.resize(n);
  for (auto& v : t.ap) v = r.i32le();
  r.expect_end();
  return t;
}

inline std::filesystem::path primes_path(const std::filesystem::path& dir, u64 limit) {
  return dir / ("primes-" + std::to_string(limit) + ".drhp");
}
inline std::filesystem::path tau_path(const std::filesystem::path& dir, std::size_t n) {
  return dir / ("tau-" + std::to_string(n) + ".drht");
}
inline std::filesystem::path ap_path(const std::filesystem::path& dir, i64 a, i64 b, u64 limit) {
  return dir / ("ap-" + std::to_string(a) + "_" + std::to_string(b) + "-" + std::to_string(limit) + ".drhe");
}

// Load from the cache when present (a corrupted file is an error, never a
// silent rebuild), otherwise compute and store.
inline PrimeTable load_or_sieve(const std::filesystem::path& dir, u64 limit, unsigned threads) {
  const auto path = primes_path(dir, limit);
  if (std::filesystem::exists(path)) {
    auto t = read_primes(path);
    if (t.limit() != limit) throw CacheError(path.string() + ": limit field disagrees with file name");
    return t;
  }
  auto t = sieve_primes(limit, threads);
  write_primes(path, t);
  return t;
}

inline TauTable load_or_build_tau(const std::filesystem::path& dir, std::size_t n) {
  const auto path = tau_path(dir, n);
  if (std::filesystem::exists(path)) {
    auto t = read_tau(path);
    if (t.N() != n) throw CacheError(path.string() + ": N disagrees with file name");
    return t;
  }
  auto t = tau_table(n);
  write_tau(path, t);
  return t;
}

inline ApTable load_or_build_ap(const std::filesystem::path& dir, const EllipticCurve& E, const PrimeTable& primes, u64 limit,
                                unsigned threads) {
  const auto path = ap_path(dir, E.a(), E.b(), limit);
  if (std::filesystem::exists(path)) {
    auto t = read_ap(path, primes);
    if (t.a != E.a() || t.b != E.b() || t.limit != limit) throw CacheError(path.string() + ": curve or limit disagrees with file name");
    return t;
  }
  auto t = compute_ap_table(E, primes, limit, threads);
  write_ap(path, t);
  return t;
}

}  // namespace drh::cache
