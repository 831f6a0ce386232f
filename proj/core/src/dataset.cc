// Copyright 2026 The ReverB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reverb/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string_view>

#include "reverb/errors.h"

namespace fs = std::filesystem;

namespace reverb {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::string_view kTwoGaussians = "synthetic:two-gaussians";

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at,
                        const char* what) {
  if (bytes.size() < at + 4) {
    throw ParseError(std::string("IDX file truncated in ") + what, bytes.size());
  }
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// Class-stratified 80/20 split, each side shuffled.
DatasetSplits split_dataset(const Dataset& all, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < all.num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all.y[i] == static_cast<int>(c)) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n_train = members.size() - members.size() / 5;
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + n_train);
    test_idx.insert(test_idx.end(), members.begin() + n_train, members.end());
  }
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  std::shuffle(test_idx.begin(), test_idx.end(), rng);
  return {all.gather(train_idx), all.gather(test_idx)};
}

Dataset shuffled(const Dataset& d, std::uint64_t seed) {
  std::vector<std::size_t> idx = iota_indices(d.size());
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return d.gather(idx);
}

std::size_t count_classes(const std::vector<int>& labels) {
  int top = -1;
  for (int y : labels) top = std::max(top, y);
  return static_cast<std::size_t>(top + 1);
}

Dataset load_idx_pair(const fs::path& images, const fs::path& labels) {
  Dataset d;
  d.x = parse_idx_images(read_bytes(images));
  d.y = parse_idx_labels(read_bytes(labels));
  if (d.y.size() != d.x.dim(0)) {
    throw DimensionError("IDX image count " + std::to_string(d.x.dim(0)) +
                         " does not match label count " +
                         std::to_string(d.y.size()));
  }
  d.num_classes = count_classes(d.y);
  return d;
}

struct CsvRows {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

void parse_csv_file(const fs::path& path, int label, CsvRows& out) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()),
                              bytes.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<double> row;
      std::size_t field = 0;
      while (true) {
        std::size_t comma = line.find(',', field);
        if (comma == std::string_view::npos) comma = line.size();
        std::string_view cell = line.substr(field, comma - field);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
          throw ParseError("bad numeric field in '" + path.string() + "'",
                           pos + field);
        }
        row.push_back(v);
        if (comma == line.size()) break;
        field = comma + 1;
      }
      if (!out.rows.empty() && row.size() != out.rows.front().size()) {
        throw ParseError("row width differs in '" + path.string() + "'", pos);
      }
      out.rows.push_back(std::move(row));
      out.labels.push_back(label);
    }
    pos = end + 1;
  }
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });
  return files;
}

CsvRows read_csv_dir(const fs::path& dir, const std::vector<std::string>& classes) {
  CsvRows rows;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const fs::path file = dir / (classes[c] + ".csv");
    if (fs::exists(file)) parse_csv_file(file, static_cast<int>(c), rows);
  }
  return rows;
}

Dataset rows_to_dataset(const CsvRows& rows, std::size_t classes, double lo,
                        double hi) {
  Dataset d;
  d.num_classes = classes;
  d.y = rows.labels;
  const std::size_t n = rows.rows.size();
  const std::size_t width = n ? rows.rows.front().size() : 0;
  const std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(width))));
  Shape shape = side * side == width && side > 1 ? Shape{n, 1, side, side}
                                                 : Shape{n, width};
  std::vector<double> data;
  data.reserve(n * width);
  const double span = hi > lo ? hi - lo : 1.0;
  for (const auto& row : rows.rows) {
    for (double v : row) data.push_back((v - lo) / span);
  }
  d.x = Tensor(std::move(shape), std::move(data));
  return d;
}

DatasetSplits load_csv_dataset(const fs::path& dir, std::uint64_t seed) {
  const bool explicit_split =
      fs::is_directory(dir / "train") && fs::is_directory(dir / "test");
  const std::vector<fs::path> files = csv_files(explicit_split ? dir / "train" : dir);
  if (files.empty()) throw IoError("no dataset files found in '" + dir.string() + "'");
  std::vector<std::string> classes;
  for (const auto& f : files) classes.push_back(f.stem().string());

  std::vector<CsvRows> parts;
  if (explicit_split) {
    parts.push_back(read_csv_dir(dir / "train", classes));
    parts.push_back(read_csv_dir(dir / "test", classes));
  } else {
    parts.push_back(read_csv_dir(dir, classes));
  }
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& p : parts) {
    for (const auto& row : p.rows) {
      for (double v : row) {
        lo = first ? v : std::min(lo, v);
        hi = first ? v : std::max(hi, v);
        first = false;
      }
    }
  }
  if (parts.front().rows.empty()) {
    throw IoError("dataset '" + dir.string() + "' has no samples");
  }
  if (parts.size() == 2 && !parts[1].rows.empty() &&
      parts[1].rows.front().size() != parts[0].rows.front().size()) {
    throw DimensionError("train and test rows differ in width");
  }
  lo = std::min(lo, 0.0);
  if (!explicit_split) {
    return split_dataset(rows_to_dataset(parts[0], classes.size(), lo, hi), seed);
  }
  DatasetSplits s;
  s.train = shuffled(rows_to_dataset(parts[0], classes.size(), lo, hi), seed);
  s.test = rows_to_dataset(parts[1], classes.size(), lo, hi);
  return s;
}

}  // namespace

Dataset Dataset::gather(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  Shape shape = x.shape();
  shape[0] = indices.size();
  const std::size_t stride = shape_size(sample_shape());
  std::vector<double> data;
  data.reserve(indices.size() * stride);
  for (std::size_t i : indices) {
    if (i >= size()) throw IndexError("sample index out of range");
    auto row = x.data().subspan(i * stride, stride);
    data.insert(data.end(), row.begin(), row.end());
    out.y.push_back(y[i]);
  }
  if (indices.empty()) {
    out.x = Tensor();
    return out;
  }
  out.x = Tensor(std::move(shape), std::move(data));
  return out;
}

Tensor parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0, "magic") != kIdxImageMagic) {
    throw ParseError("not an IDX image file", 0);
  }
  const std::size_t n = read_be32(bytes, 4, "image count");
  const std::size_t rows = read_be32(bytes, 8, "row count");
  const std::size_t cols = read_be32(bytes, 12, "column count");
  if (n == 0 || rows == 0 || cols == 0) {
    throw ParseError("IDX image header has a zero dimension", 4);
  }
  const std::size_t need = 16 + n * rows * cols;
  if (bytes.size() < need) throw ParseError("IDX image data truncated", bytes.size());
  if (bytes.size() > need) throw ParseError("trailing bytes after IDX images", need);
  std::vector<double> data(n * rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[16 + i] / 255.0;
  return Tensor({n, 1, rows, cols}, std::move(data));
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0, "magic") != kIdxLabelMagic) {
    throw ParseError("not an IDX label file", 0);
  }
  const std::size_t n = read_be32(bytes, 4, "label count");
  if (bytes.size() < 8 + n) throw ParseError("IDX label data truncated", bytes.size());
  if (bytes.size() > 8 + n) throw ParseError("trailing bytes after IDX labels", 8 + n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = bytes[8 + i];
  return labels;
}

Dataset make_two_gaussians(std::size_t count, std::size_t features,
                           std::uint64_t seed) {
  if (count < 2 || features == 0) {
    throw DimensionError("two-gaussians needs at least 2 samples and 1 feature");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.num_classes = 2;
  std::vector<double> data(count * features);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    const double centre = label ? 2.0 : -2.0;
    d.y.push_back(label);
    for (std::size_t f = 0; f < features; ++f) {
      data[i * features + f] = centre + noise(rng);
    }
  }
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  const double min = *lo;
  const double span = *hi - *lo;
  for (double& v : data) v = (v - min) / span;
  d.x = Tensor({count, features}, std::move(data));
  return d;
}

DatasetSplits load_dataset(const std::string& path, std::uint64_t seed) {
  if (path == kTwoGaussians) {
    return split_dataset(make_two_gaussians(500, 16, seed), seed);
  }
  const fs::path dir(path);
  if (!fs::is_directory(dir)) {
    throw IoError("dataset path '" + path + "' is not a readable directory");
  }
  const fs::path train_images = dir / "train-images-idx3-ubyte";
  if (fs::exists(train_images)) {
    DatasetSplits s;
    const Dataset train = load_idx_pair(train_images, dir / "train-labels-idx1-ubyte");
    const fs::path test_images = dir / "t10k-images-idx3-ubyte";
    if (!fs::exists(test_images)) return split_dataset(train, seed);
    s.train = shuffled(train, seed);
    s.test = load_idx_pair(test_images, dir / "t10k-labels-idx1-ubyte");
    s.test.num_classes = s.train.num_classes =
        std::max(s.train.num_classes, s.test.num_classes);
    if (s.test.sample_shape() != s.train.sample_shape()) {
      throw DimensionError("train and test images differ in shape");
    }
    return s;
  }
  return load_csv_dataset(dir, seed);
}

}  // namespace reverb
