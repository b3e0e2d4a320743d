#include "synevo/genome_io.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "synevo/errors.hpp"

namespace synevo {

namespace {

using Kind = ParseError::Kind;

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void bits(const std::vector<std::uint8_t>& mask) {
    std::uint8_t acc = 0;
    std::size_t filled = 0;
    for (auto m : mask) {
      acc |= static_cast<std::uint8_t>((m & 1u) << filled);
      if (++filled == 8) {
        bytes_.push_back(acc);
        acc = 0;
        filled = 0;
      }
    }
    if (filled > 0) bytes_.push_back(acc);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::size_t offset) : bytes_(bytes), pos_(offset) {}

  std::size_t offset() const noexcept { return pos_; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * b);
    return v;
  }
  double f64() {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * b);
    return std::bit_cast<double>(v);
  }
  std::vector<std::uint8_t> bits(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (bytes_[pos_ + i / 8] >> (i % 8)) & 1u;
    const std::size_t used = (n + 7) / 8;
    if (n % 8 != 0 && (bytes_[pos_ + used - 1] >> (n % 8)) != 0) {
      throw ParseError(Kind::malformed_schema, pos_ + used - 1, "nonzero padding bits in mask");
    }
    pos_ += used;
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; genomes are far below 4 GiB.
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::size_t payload_bytes(const std::vector<LayerSpec>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) {
    if (!l.has_weights()) continue;
    n += 8 * l.weight_count() + 8 * l.kernel_count() + (l.weight_count() + 7) / 8 + (l.kernel_count() + 7) / 8;
  }
  return n;
}

std::string join_shape(const std::vector<std::size_t>& dims, char sep) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(dims[i]);
  }
  return out;
}

std::size_t parse_size(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidInput("bad integer '" + text + "' for " + what);
  return v;
}

std::vector<std::size_t> parse_dims(const std::string& text, char sep, const std::string& what) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = text.find(sep, start);
    dims.push_back(parse_size(text.substr(start, stop - start), what));
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return dims;
}

struct Schema {
  std::string id;
  std::optional<std::string> parent;
  std::uint32_t generation = 0;
  InputShape input;
  std::vector<LayerSpec> layers;
};

std::string encode_schema(const NetworkGenome& g) {
  std::ostringstream out;
  out << "id=" << g.id << '\n';
  if (g.parent_id) out << "parent=" << *g.parent_id << '\n';
  out << "generation=" << g.generation << '\n';
  out << "input=" << g.input.channels << 'x' << g.input.height << 'x' << g.input.width << '\n';
  for (const auto& l : g.layers) out << "layer=" << format_layer(l) << '\n';
  return out.str();
}

Schema decode_schema(const std::string& text, std::size_t base) {
  Schema s;
  bool have_id = false, have_gen = false, have_input = false;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    const std::string line = text.substr(line_start, line_end - line_start);
    const std::size_t at = base + line_start;
    try {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidInput("missing '='");
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      if (key == "id") {
        s.id = value;
        have_id = true;
      } else if (key == "parent") {
        s.parent = value;
      } else if (key == "generation") {
        s.generation = static_cast<std::uint32_t>(parse_size(value, "generation"));
        have_gen = true;
      } else if (key == "input") {
        const auto dims = parse_dims(value, 'x', "input");
        if (dims.size() != 3) throw InvalidInput("input needs 3 dimensions");
        s.input = {dims[0], dims[1], dims[2]};
        have_input = true;
      } else if (key == "layer") {
        s.layers.push_back(parse_layer(value));
      } else {
        throw InvalidInput("unknown key '" + key + "'");
      }
    } catch (const InvalidInput& e) {
      throw ParseError(Kind::malformed_schema, at, "line '" + line + "': " + e.what());
    }
    line_start = line_end + 1;
  }
  if (!have_id || !have_gen || !have_input) {
    throw ParseError(Kind::malformed_schema, base, "schema lacks id, generation or input");
  }
  try {
    infer_shapes(s.input, s.layers);
  } catch (const InvalidInput& e) {
    throw ParseError(Kind::malformed_schema, base, e.what());
  }
  return s;
}

}  // namespace

std::string format_layer(const LayerSpec& layer) {
  std::string out = "kind=";
  out += layer_kind_name(layer.kind);
  if (!layer.kernel_shape.empty()) out += " shape=" + join_shape(layer.kernel_shape, ',');
  out += " stride=" + std::to_string(layer.stride) + " padding=" + std::to_string(layer.padding);
  return out;
}

LayerSpec parse_layer(const std::string& line) {
  LayerSpec spec;
  bool have_kind = false;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InvalidInput("token '" + token + "' lacks '='");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "kind") {
      auto kind = parse_layer_kind(value);
      if (!kind) throw InvalidInput("unknown layer kind '" + value + "'");
      spec.kind = *kind;
      have_kind = true;
    } else if (key == "shape") {
      spec.kernel_shape = parse_dims(value, ',', "shape");
    } else if (key == "stride") {
      spec.stride = parse_size(value, "stride");
    } else if (key == "padding") {
      spec.padding = parse_size(value, "padding");
    } else {
      throw InvalidInput("unknown layer field '" + key + "'");
    }
  }
  if (!have_kind) throw InvalidInput("layer lacks kind");
  return spec;
}

std::vector<std::uint8_t> encode_genome(const NetworkGenome& genome) {
  if (auto v = validate(genome); !v.empty()) throw InvalidInput("refusing to save invalid genome: " + v.front().message);
  ByteWriter w;
  w.raw(kGenomeMagic, sizeof kGenomeMagic);
  w.u32(kGenomeFormatVersion);
  const std::string schema = encode_schema(genome);
  w.u32(static_cast<std::uint32_t>(schema.size()));
  w.raw(schema.data(), schema.size());
  for (std::size_t i = 0; i < genome.layers.size(); ++i) {
    if (!genome.layers[i].has_weights()) continue;
    const LayerParams& p = genome.params[i];
    for (double v : p.weights.values()) w.f64(v);
    for (double v : p.bias) w.f64(v);
    w.bits(p.synapse_mask);
    w.bits(p.cluster_mask);
  }
  const std::uint32_t crc = crc_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

NetworkGenome decode_genome(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < sizeof kGenomeMagic || std::memcmp(bytes.data(), kGenomeMagic, sizeof kGenomeMagic) != 0) {
    throw ParseError(Kind::bad_magic, 0, "not a genome file");
  }
  if (bytes.size() < kHeader) {
    throw ParseError(Kind::truncated, bytes.size(),
                     "expected at least " + std::to_string(kHeader) + " bytes, got " + std::to_string(bytes.size()));
  }
  ByteReader header(bytes, 8);
  const std::uint32_t version = header.u32();
  if (version != kGenomeFormatVersion) {
    throw ParseError(Kind::version_mismatch, 8,
                     "format version " + std::to_string(version) + ", expected " +
                         std::to_string(kGenomeFormatVersion));
  }
  const std::size_t schema_len = header.u32();
  if (bytes.size() < kHeader + schema_len) {
    throw ParseError(Kind::truncated, bytes.size(),
                     "expected " + std::to_string(kHeader + schema_len) + " bytes of header and schema, got " +
                         std::to_string(bytes.size()));
  }
  const std::string schema_text(reinterpret_cast<const char*>(bytes.data() + kHeader), schema_len);
  Schema schema = decode_schema(schema_text, kHeader);

  const std::size_t expected = kHeader + schema_len + payload_bytes(schema.layers) + 4;
  if (bytes.size() < expected) {
    throw ParseError(Kind::truncated, bytes.size(),
                     "expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw ParseError(Kind::malformed_schema, expected,
                     std::to_string(bytes.size() - expected) + " unexpected trailing bytes");
  }
  ByteReader trailer(bytes, expected - 4);
  const std::uint32_t stored_crc = trailer.u32();
  const std::uint32_t actual_crc = crc_of(bytes.first(expected - 4));
  if (stored_crc != actual_crc) {
    throw ParseError(Kind::checksum, expected - 4, "stored CRC-32 does not match contents");
  }

  NetworkGenome g;
  g.id = std::move(schema.id);
  g.parent_id = std::move(schema.parent);
  g.generation = schema.generation;
  g.input = schema.input;
  g.layers = std::move(schema.layers);
  g.params.resize(g.layers.size());
  ByteReader r(bytes, kHeader + schema_len);
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const LayerSpec& l = g.layers[i];
    if (!l.has_weights()) continue;
    LayerParams& p = g.params[i];
    p.weights = Tensor(l.weight_shape());
    for (double& v : p.weights.values()) v = r.f64();
    p.bias.resize(l.kernel_count());
    for (double& v : p.bias) v = r.f64();
    p.synapse_mask = r.bits(l.weight_count());
    p.cluster_mask = r.bits(l.kernel_count());
  }
  return g;
}

void save_genome(const NetworkGenome& genome, const std::filesystem::path& path) {
  const auto bytes = encode_genome(genome);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

NetworkGenome load_genome(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(Kind::io, 0, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_genome(bytes);
}

}  // namespace synevo
