#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "crrlearn/tensor.hpp"

namespace crrlearn {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};
class BadMagicError : public IoError {
 public:
  explicit BadMagicError(const std::string& what) : IoError(what) {}
};
class TruncatedError : public IoError {
 public:
  explicit TruncatedError(const std::string& what) : IoError(what) {}
};
class BadRankError : public IoError {
 public:
  explicit BadRankError(const std::string& what) : IoError(what) {}
};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_f64_le(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64_le(out, v);
}

class ByteReader {
 public:
  explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw TruncatedError("truncated payload");
  }
  std::uint8_t u8() {
    need(1);
    return std::uint8_t(bytes_[pos_++]);
  }
  std::uint32_t u32_le() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(bytes_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64_le() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64_le() {
    std::uint64_t v = u64_le();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace detail

// TNSR format: "TNSR", version byte 1, u32 LE rank, rank x u64 LE extents,
// data as LE IEEE-754 doubles.

inline std::string tensor_to_bytes(const Tensor& t) {
  if (t.rank() == 0) throw BadRankError("refusing to serialize rank-0 tensor");
  std::string out = "TNSR";
  out.push_back(char(1));
  detail::put_u32_le(out, std::uint32_t(t.rank()));
  for (std::size_t e : t.shape()) detail::put_u64_le(out, std::uint64_t(e));
  for (std::size_t i = 0; i < t.size(); ++i) detail::put_f64_le(out, t[i]);
  return out;
}

inline Tensor tensor_from_bytes(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != "TNSR") throw BadMagicError("bad magic, expected TNSR");
  std::uint8_t version = r.u8();
  if (version != 1) throw IoError("unsupported TNSR version");
  std::uint32_t rank = r.u32_le();
  if (rank == 0) throw BadRankError("rank 0 tensor file");
  std::vector<std::size_t> shape(rank);
  for (std::uint32_t i = 0; i < rank; ++i) shape[i] = std::size_t(r.u64_le());
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = r.f64_le();
  return t;
}

inline void tensor_io_write(const std::string& path, const Tensor& t) {
  detail::write_file(path, tensor_to_bytes(t));
}

inline Tensor tensor_io_read(const std::string& path) {
  return tensor_from_bytes(detail::read_file(path));
}

// Binary PGM/PPM (P5/P6), 8-bit, maxval 255. Import maps byte v to v/255;
// export maps u to round(clamp(u,0,1)*255) with round-half-up.

inline std::uint8_t quantize_byte(double u) {
  double c = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
  return std::uint8_t(std::floor(c * 255.0 + 0.5));
}

inline void pnm_write(const std::string& path, const Image& img) {
  std::string out = img.channels() == 1 ? "P5" : "P6";
  out += "\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  for (std::size_t i = 0; i < img.height(); ++i) {
    for (std::size_t j = 0; j < img.width(); ++j) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        out.push_back(char(quantize_byte(img.tensor.at3(c, i, j))));
      }
    }
  }
  detail::write_file(path, out);
}

inline Image pnm_read(const std::string& path) {
  std::string bytes = detail::read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && (std::isspace(std::uint8_t(bytes[pos])) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(std::uint8_t(bytes[pos]))) ++pos;
    if (start == pos) throw TruncatedError("truncated PNM header");
    return bytes.substr(start, pos - start);
  };
  std::string magic = token();
  std::size_t channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw BadMagicError("unsupported PNM magic " + magic);
  }
  std::size_t w = std::stoul(token());
  std::size_t h = std::stoul(token());
  std::size_t maxval = std::stoul(token());
  if (maxval != 255) throw IoError("unsupported PNM maxval " + std::to_string(maxval));
  ++pos;  // single whitespace after maxval
  if (pos + channels * w * h > bytes.size()) throw TruncatedError("truncated PNM payload");
  Image img(channels, h, w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t c = 0; c < channels; ++c) {
        img.tensor.at3(c, i, j) = double(std::uint8_t(bytes[pos++])) / 255.0;
      }
    }
  }
  return img;
}

}  // namespace crrlearn
