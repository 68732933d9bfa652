#pragma once

#include <string>

#include "crrlearn/crr.hpp"
#include "crrlearn/io.hpp"

namespace crrlearn {

/// Trainer snapshot: parameters plus enough bookkeeping to resume.
struct Checkpoint {
  CRRParams params;
  std::uint64_t iteration = 0;
  std::uint64_t master_seed = 0;
};

// CRRCKPT1 layout: magic "CRRCKPT1", version byte 1, architecture header
// (in_ch, mid_ch, C, K as u32 LE; knot spacing as f64 LE; flags byte with
// bit0=use_diff, bit1=has_bias, bit2=learn_scale), then conv1, conv2, the
// spline slopes, bias, log_scale as LE f64, then iteration counter and
// master seed as u64 LE. Bit-exact round trip.

inline std::string checkpoint_to_bytes(const Checkpoint& ck) {
  const CRRParams& p = ck.params;
  std::string out = "CRRCKPT1";
  out.push_back(char(1));
  detail::put_u32_le(out, std::uint32_t(p.in_ch));
  detail::put_u32_le(out, std::uint32_t(p.mid_ch));
  detail::put_u32_le(out, std::uint32_t(p.num_ridges));
  detail::put_u32_le(out, std::uint32_t(p.splines.half_knots));
  detail::put_f64_le(out, p.splines.delta);
  std::uint8_t flags = (p.use_diff ? 1u : 0u) | (p.has_bias ? 2u : 0u) | (p.learn_scale ? 4u : 0u);
  out.push_back(char(flags));
  for (std::size_t i = 0; i < p.conv1.weights.size(); ++i) {
    detail::put_f64_le(out, p.conv1.weights[i]);
  }
  for (std::size_t i = 0; i < p.conv2.weights.size(); ++i) {
    detail::put_f64_le(out, p.conv2.weights[i]);
  }
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) detail::put_f64_le(out, p.splines.d[i]);
  for (double b : p.bias) detail::put_f64_le(out, b);
  detail::put_f64_le(out, p.log_scale);
  detail::put_u64_le(out, ck.iteration);
  detail::put_u64_le(out, ck.master_seed);
  return out;
}

inline Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(8) != "CRRCKPT1") throw BadMagicError("bad magic, expected CRRCKPT1");
  if (r.u8() != 1) throw IoError("unsupported checkpoint version");
  std::size_t in_ch = r.u32_le();
  std::size_t mid_ch = r.u32_le();
  std::size_t C = r.u32_le();
  std::size_t K = r.u32_le();
  double delta = r.f64_le();
  std::uint8_t flags = r.u8();
  Checkpoint ck;
  CRRParams& p = ck.params;
  p.in_ch = in_ch;
  p.mid_ch = mid_ch;
  p.num_ridges = C;
  p.use_diff = (flags & 1u) != 0;
  p.has_bias = (flags & 2u) != 0;
  p.learn_scale = (flags & 4u) != 0;
  std::size_t c1_in = p.use_diff ? 2 * in_ch : in_ch;
  p.conv1 = ConvLayer(mid_ch, c1_in, 7);
  p.conv2 = ConvLayer(C, mid_ch, 7);
  p.splines = SplineBank(C, K, delta);
  for (std::size_t i = 0; i < p.conv1.weights.size(); ++i) p.conv1.weights[i] = r.f64_le();
  for (std::size_t i = 0; i < p.conv2.weights.size(); ++i) p.conv2.weights[i] = r.f64_le();
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) p.splines.d[i] = r.f64_le();
  p.bias.assign(p.has_bias ? C : 0, 0.0);
  for (double& b : p.bias) b = r.f64_le();
  p.log_scale = r.f64_le();
  ck.iteration = r.u64_le();
  ck.master_seed = r.u64_le();
  if (!r.exhausted()) throw IoError("trailing bytes after checkpoint payload");
  return ck;
}

inline void checkpoint_write(const std::string& path, const Checkpoint& ck) {
  detail::write_file(path, checkpoint_to_bytes(ck));
}

inline Checkpoint checkpoint_read(const std::string& path) {
  return checkpoint_from_bytes(detail::read_file(path));
}

}  // namespace crrlearn
