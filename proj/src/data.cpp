#include "synevo/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "synevo/errors.hpp"
#include "synevo/rng.hpp"

namespace synevo {

std::size_t Dataset::sample_volume() const {
  return images.rank() == 4 ? images.dim(1) * images.dim(2) * images.dim(3) : 0;
}

Tensor Dataset::gather(std::span<const std::size_t> order, std::size_t first, std::size_t count) const {
  const std::size_t vol = sample_volume();
  Tensor batch({count, images.dim(1), images.dim(2), images.dim(3)});
  for (std::size_t j = 0; j < count; ++j) {
    const double* src = images.data() + order[first + j] * vol;
    std::copy(src, src + vol, batch.data() + j * vol);
  }
  return batch;
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> h(class_count, 0);
  for (int y : labels) ++h.at(static_cast<std::size_t>(y));
  return h;
}

void check_dataset(const Dataset& data) {
  if (data.images.rank() != 4) throw InvalidInput("images must be (n, channels, height, width)");
  if (data.images.dim(0) != data.labels.size()) {
    throw InvalidInput(std::to_string(data.images.dim(0)) + " images but " + std::to_string(data.labels.size()) +
                       " labels");
  }
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= data.class_count) {
      throw InvalidInput("label " + std::to_string(y) + " outside [0, " + std::to_string(data.class_count) + ")");
    }
  }
}

namespace {

using Kind = ParseError::Kind;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw ParseError(Kind::io, 0, "cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw ParseError(Kind::io, out.size(), "read error in " + path.string());
  return out;
}

void write_all(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb9");
    if (f == nullptr) throw Error("cannot open " + path.string() + " for writing");
    const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    if (n != static_cast<int>(bytes.size())) throw Error("failed writing " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

void expect_magic(std::uint32_t magic, std::uint32_t expected, const std::string& name) {
  if (magic != expected) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": magic 0x%08X, expected 0x%08X", magic, expected);
    throw ParseError(Kind::bad_magic, 0, name + buf);
  }
}

// expected == 0 accepts any IDX magic.
IdxHeader parse_header(const std::vector<std::uint8_t>& bytes, const std::string& name, std::uint32_t expected = 0) {
  if (bytes.size() < 4) throw ParseError(Kind::truncated, bytes.size(), name + ": expected 4-byte magic");
  IdxHeader h;
  h.magic = be32(bytes, 0);
  if ((h.magic >> 16) != 0) throw ParseError(Kind::bad_magic, 0, name + ": not an IDX file");
  if (expected != 0) expect_magic(h.magic, expected, name);
  const std::size_t ndims = h.magic & 0xFF;
  const std::size_t need = 4 + 4 * ndims;
  if (bytes.size() < need) {
    throw ParseError(Kind::truncated, bytes.size(),
                     name + ": expected " + std::to_string(need) + " header bytes, got " +
                         std::to_string(bytes.size()));
  }
  for (std::size_t d = 0; d < ndims; ++d) h.dims.push_back(be32(bytes, 4 + 4 * d));
  return h;
}

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

IdxHeader read_idx_header(const std::filesystem::path& path) { return parse_header(read_all(path), path.string()); }

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Split split,
                 std::size_t class_count) {
  const auto img_bytes = read_all(images);
  const auto lbl_bytes = read_all(labels);
  const IdxHeader ih = parse_header(img_bytes, images.string(), kIdxImageMagic);
  const IdxHeader lh = parse_header(lbl_bytes, labels.string(), kIdxLabelMagic);
  if (ih.dims[0] != lh.dims[0]) {
    throw ParseError(Kind::dimension_mismatch, 4,
                     std::to_string(ih.dims[0]) + " images but " + std::to_string(lh.dims[0]) + " labels");
  }
  const std::size_t img_start = 4 + 4 * ih.dims.size();
  const std::size_t img_expected = img_start + product(ih.dims);
  if (img_bytes.size() < img_expected) {
    throw ParseError(Kind::truncated, img_bytes.size(),
                     images.string() + ": expected " + std::to_string(img_expected) + " bytes, got " +
                         std::to_string(img_bytes.size()));
  }
  const std::size_t lbl_start = 4 + 4 * lh.dims.size();
  const std::size_t lbl_expected = lbl_start + product(lh.dims);
  if (lbl_bytes.size() < lbl_expected) {
    throw ParseError(Kind::truncated, lbl_bytes.size(),
                     labels.string() + ": expected " + std::to_string(lbl_expected) + " bytes, got " +
                         std::to_string(lbl_bytes.size()));
  }

  Dataset d;
  d.split = split;
  const std::size_t n = ih.dims[0];
  d.images = Tensor({n, 1, ih.dims[1], ih.dims[2]});
  for (std::size_t i = 0; i < d.images.size(); ++i) d.images[i] = img_bytes[img_start + i] / 255.0;
  d.labels.resize(n);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = lbl_bytes[lbl_start + i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.class_count = class_count > 0 ? class_count : static_cast<std::size_t>(max_label + 1);
  check_dataset(d);
  return d;
}

void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels) {
  check_dataset(data);
  if (data.images.dim(1) != 1) throw InvalidInput("IDX export supports single-channel images only");
  std::vector<std::uint8_t> ib;
  put_be32(ib, kIdxImageMagic);
  put_be32(ib, static_cast<std::uint32_t>(data.size()));
  put_be32(ib, static_cast<std::uint32_t>(data.images.dim(2)));
  put_be32(ib, static_cast<std::uint32_t>(data.images.dim(3)));
  for (double v : data.images.values()) {
    ib.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  std::vector<std::uint8_t> lb;
  put_be32(lb, kIdxLabelMagic);
  put_be32(lb, static_cast<std::uint32_t>(data.size()));
  for (int y : data.labels) lb.push_back(static_cast<std::uint8_t>(y));
  write_all(images, ib);
  write_all(labels, lb);
}

Dataset synth_blobs(std::size_t n, std::size_t class_count, std::size_t image_size, std::uint64_t seed,
                    double spread) {
  if (class_count == 0 || n < class_count) throw InvalidInput("need at least one sample per class");
  if (image_size == 0) throw InvalidInput("image size must be positive");
  SequentialRng rng(seed);
  const std::size_t vol = image_size * image_size;
  std::vector<double> templates(class_count * vol);
  for (double& t : templates) t = rng.uniform(0.1, 0.9);

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % class_count);
  for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  Dataset d;
  d.class_count = class_count;
  d.labels = std::move(labels);
  d.images = Tensor({n, 1, image_size, image_size});
  for (std::size_t i = 0; i < n; ++i) {
    const double* t = templates.data() + static_cast<std::size_t>(d.labels[i]) * vol;
    for (std::size_t p = 0; p < vol; ++p) d.images[i * vol + p] = std::clamp(t[p] + spread * rng.normal(), 0.0, 1.0);
  }
  return d;
}

Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed) {
  check_dataset(data);
  if (n > data.size()) {
    throw InvalidInput("cannot take " + std::to_string(n) + " samples from " + std::to_string(data.size()));
  }
  const std::size_t total = data.size();
  std::vector<std::vector<std::size_t>> by_class(data.class_count);
  for (std::size_t i = 0; i < total; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  // Largest-remainder apportionment of n over the classes.
  std::vector<std::size_t> quota(data.class_count);
  std::vector<std::pair<std::size_t, std::size_t>> remainder;  // (numerator remainder, class)
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < data.class_count; ++c) {
    const std::size_t num = n * by_class[c].size();
    quota[c] = num / total;
    assigned += quota[c];
    remainder.emplace_back(num % total, c);
  }
  std::stable_sort(remainder.begin(), remainder.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++quota[remainder[i].second];

  SequentialRng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t c = 0; c < data.class_count; ++c) {
    auto& idx = by_class[c];
    for (std::size_t i = 0; i < quota[c]; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      keep.push_back(idx[i]);
    }
  }
  std::sort(keep.begin(), keep.end());

  Dataset out;
  out.class_count = data.class_count;
  out.split = data.split;
  out.images = data.gather(keep, 0, keep.size());
  out.labels.reserve(keep.size());
  for (auto i : keep) out.labels.push_back(data.labels[i]);
  return out;
}

}  // namespace synevo
