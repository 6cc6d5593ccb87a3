#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "polyreg/errors.hpp"
#include "polyreg/imaging.hpp"
#include "polyreg/measure.hpp"
#include "polyreg/network.hpp"

namespace polyreg {

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline bool is_gzip(const std::vector<std::uint8_t>& b) {
  return b.size() >= 2 && b[0] == 0x1f && b[1] == 0x8b;
}

inline std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw IoError("gzip: inflateInit failed");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buf(1 << 20);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IoError("gzip: corrupt stream");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

inline std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

}  // namespace detail

// Parsed IDX file: big-endian magic, 32-bit dims, raw unsigned-byte payload.
// Gzip-compressed files are accepted transparently.
struct IdxFile {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  static IdxFile load(const std::string& path) {
    auto bytes = detail::read_file_bytes(path);
    if (detail::is_gzip(bytes)) bytes = detail::gunzip(bytes);
    if (bytes.size() < 4) throw IoError("idx: truncated header: " + path);
    IdxFile f;
    f.magic = detail::read_be32(bytes.data());
    if ((f.magic >> 16) != 0 || ((f.magic >> 8) & 0xff) != 0x08)
      throw IoError("idx: bad magic (expected unsigned-byte data): " + path);
    const std::size_t ndim = f.magic & 0xff;
    if (bytes.size() < 4 + 4 * ndim) throw IoError("idx: truncated dims: " + path);
    std::size_t total = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      const std::uint32_t dim = detail::read_be32(bytes.data() + 4 + 4 * i);
      if (dim != 0 && total > SIZE_MAX / dim) throw IoError("idx: dimension overflow");
      f.dims.push_back(dim);
      total *= dim;
    }
    if (bytes.size() != 4 + 4 * ndim + total)
      throw IoError("idx: payload size mismatch (truncated?): " + path);
    f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(4 + 4 * ndim), bytes.end());
    return f;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    auto put_be32 = [&](std::uint32_t v) {
      const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                                 static_cast<std::uint8_t>(v >> 16),
                                 static_cast<std::uint8_t>(v >> 8),
                                 static_cast<std::uint8_t>(v)};
      out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_be32(magic);
    for (auto d : dims) put_be32(d);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
  }
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// N x H x W images scaled to [0,1]; labels filled by pair_with_labels.
inline ImageDataset load_idx_images(const std::string& path) {
  const IdxFile f = IdxFile::load(path);
  if (f.magic != kIdxImagesMagic) throw IoError("idx: not an image file: " + path);
  if (f.dims.size() != 3) throw IoError("idx: image file must have 3 dims: " + path);
  ImageDataset ds;
  const auto n = static_cast<Eigen::Index>(f.dims[0]);
  ds.height = static_cast<int>(f.dims[1]);
  ds.width = static_cast<int>(f.dims[2]);
  const auto pixels = static_cast<Eigen::Index>(ds.height) * ds.width;
  ds.images.resize(n, pixels);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index p = 0; p < pixels; ++p)
      ds.images(i, p) =
          static_cast<double>(f.payload[static_cast<std::size_t>(i * pixels + p)]) / 255.0;
  return ds;
}

inline std::vector<int> load_idx_labels(const std::string& path, int classes = 10) {
  const IdxFile f = IdxFile::load(path);
  if (f.magic != kIdxLabelsMagic) throw IoError("idx: not a label file: " + path);
  if (f.dims.size() != 1) throw IoError("idx: label file must have 1 dim: " + path);
  std::vector<int> labels(f.payload.size());
  for (std::size_t i = 0; i < f.payload.size(); ++i) {
    labels[i] = static_cast<int>(f.payload[i]);
    if (labels[i] >= classes) throw IoError("idx: label out of range: " + path);
  }
  return labels;
}

inline ImageDataset load_idx_dataset(const std::string& images_path,
                                     const std::string& labels_path, int classes = 10) {
  ImageDataset ds = load_idx_images(images_path);
  ds.labels = load_idx_labels(labels_path, classes);
  ds.classes = classes;
  if (static_cast<Eigen::Index>(ds.labels.size()) != ds.images.rows())
    throw IoError("idx: image/label count mismatch between files");
  ds.validate();
  return ds;
}

// Labels y_i = f(teacher, x_i) on i.i.d. rows from spec.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> synth_teacher_dataset(
    const MeasureSpec& spec, const NetworkParams& teacher, Eigen::Index n,
    std::uint64_t seed) {
  const Eigen::MatrixXd xs = spec.sample_matrix(n, teacher.input_dim, seed);
  return {xs, teacher.forward_rows(xs)};
}

// Binary column-major matrix dump: magic "PRMX", rows and cols as 64-bit
// little-endian, then raw 64-bit doubles.
inline void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out.write("PRMX", 4);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), 16);
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

inline Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PRMX", 4) != 0)
    throw IoError("matrix dump: bad magic: " + path);
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), 16);
  if (!in) throw IoError("matrix dump: truncated header: " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!in) throw IoError("matrix dump: truncated payload: " + path);
  return m;
}

}  // namespace polyreg
