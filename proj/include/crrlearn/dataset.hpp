#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "crrlearn/config.hpp"
#include "crrlearn/io.hpp"
#include "crrlearn/rng.hpp"
#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Piecewise-constant test images: 2-5 axis-aligned rectangles of random
/// intensity on a zero background. Self-contained stand-in for a natural
/// image corpus.
inline Dataset synthetic_blobs(std::size_t count, std::size_t channels, std::size_t height,
                               std::size_t width, std::uint64_t seed) {
  Dataset ds;
  ds.metadata["source"] = "synthetic_blobs";
  ds.metadata["seed"] = std::to_string(seed);
  for (std::size_t n = 0; n < count; ++n) {
    RngStream rng(seed, 0x626c6f62ULL + n);
    Image img(channels, height, width);
    std::size_t rects = 2 + std::size_t(rng.next_u64() % 4);  // 2..5
    for (std::size_t r = 0; r < rects; ++r) {
      std::size_t i0 = std::size_t(rng.next_u64() % height);
      std::size_t i1 = std::size_t(rng.next_u64() % height);
      std::size_t j0 = std::size_t(rng.next_u64() % width);
      std::size_t j1 = std::size_t(rng.next_u64() % width);
      if (i0 > i1) std::swap(i0, i1);
      if (j0 > j1) std::swap(j0, j1);
      double level = rng.next_uniform();
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = i0; i <= i1; ++i) {
          for (std::size_t j = j0; j <= j1; ++j) img.tensor.at3(c, i, j) = level;
        }
      }
    }
    ds.items.push_back(std::move(img));
  }
  return ds;
}

/// On-disk layout: <dir>/item_NNNN.tnsr plus a meta.txt key=value sidecar.
inline void dataset_write(const std::string& dir, const Dataset& ds) {
  ds.validate();
  std::filesystem::create_directories(dir);
  std::string meta;
  for (const auto& [k, v] : ds.metadata) meta += k + " = " + v + "\n";
  meta += "count = " + std::to_string(ds.items.size()) + "\n";
  detail::write_file(dir + "/meta.txt", meta);
  for (std::size_t n = 0; n < ds.items.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "item_%04zu.tnsr", n);
    tensor_io_write(dir + "/" + name, ds.items[n].tensor);
  }
}

inline Dataset dataset_read(const std::string& dir) {
  Dataset ds;
  Config meta = parse_config(detail::read_file(dir + "/meta.txt"));
  std::size_t count = 0;
  for (const auto& [k, v] : meta.values()) {
    if (k == "count") {
      count = std::size_t(std::stoull(v));
    } else {
      ds.metadata[k] = v;
    }
  }
  if (count == 0) throw IoError("dataset at " + dir + " declares no items");
  for (std::size_t n = 0; n < count; ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "item_%04zu.tnsr", n);
    ds.items.emplace_back(tensor_io_read(dir + "/" + name));
  }
  ds.validate();
  return ds;
}

}  // namespace crrlearn
