#ifndef GLVORTEX_SNAPSHOT_IO_HPP
#define GLVORTEX_SNAPSHOT_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "glvortex/errors.hpp"
#include "glvortex/field.hpp"

// Binary snapshot layout (little-endian):
//   char[4]  "GLF1"
//   uint32   dim
//   uint64   n_i         (dim entries)
//   double   L_i         (dim entries)
//   double   epsilon
//   double   time
//   uint8    precision   (0 = float64 pairs, 1 = float32 pairs)
//   re,im pairs in row-major order, axis 0 slowest

namespace glv {

namespace detail {

static_assert(std::endian::native == std::endian::little, "snapshot io assumes a little-endian host");

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("truncated snapshot: " + path);
  return v;
}

}  // namespace detail

enum class SnapshotPrecision : std::uint8_t { Double = 0, Single = 1 };

inline void write_snapshot(const std::filesystem::path& path, const ComplexField& field,
                           SnapshotPrecision precision = SnapshotPrecision::Double) {
  field.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open snapshot for writing: " + path.string());
  os.write("GLF1", 4);
  const auto& g = field.geom;
  detail::write_pod(os, std::uint32_t(g.dim()));
  for (int a = 0; a < g.dim(); ++a) detail::write_pod(os, std::uint64_t(g.size(a)));
  for (int a = 0; a < g.dim(); ++a) detail::write_pod(os, g.length(a));
  detail::write_pod(os, field.epsilon);
  detail::write_pod(os, field.time);
  detail::write_pod(os, std::uint8_t(precision));
  if (precision == SnapshotPrecision::Double) {
    os.write(reinterpret_cast<const char*>(field.values.data()), std::streamsize(field.values.size() * sizeof(cplx)));
  } else {
    std::vector<float> buf(2 * field.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      buf[2 * i] = float(field.values[i].real());
      buf[2 * i + 1] = float(field.values[i].imag());
    }
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
  }
  if (!os) throw InputError("failed writing snapshot: " + path.string());
}

inline ComplexField read_snapshot(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open snapshot: " + p);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GLF1", 4) != 0) throw InputError("not a GLF1 snapshot: " + p);
  const auto dim = detail::read_pod<std::uint32_t>(is, p);
  if (dim != 2 && dim != 3) throw InputError("snapshot has unsupported dimension: " + p);
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<double, 3> L{1.0, 1.0, 1.0};
  for (std::uint32_t a = 0; a < dim; ++a) n[a] = std::size_t(detail::read_pod<std::uint64_t>(is, p));
  for (std::uint32_t a = 0; a < dim; ++a) L[a] = detail::read_pod<double>(is, p);
  const double eps = detail::read_pod<double>(is, p);
  const double t = detail::read_pod<double>(is, p);
  const auto prec = detail::read_pod<std::uint8_t>(is, p);
  TorusGeometry geom(int(dim), L, n);
  ComplexGrid values(geom.node_count());
  if (prec == 0) {
    is.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(cplx)));
  } else if (prec == 1) {
    std::vector<float> buf(2 * values.size());
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = cplx(buf[2 * i], buf[2 * i + 1]);
  } else {
    throw InputError("unknown precision flag in snapshot: " + p);
  }
  if (!is) throw InputError("truncated snapshot: " + p);
  return ComplexField(std::move(geom), std::move(values), eps, t);
}

}  // namespace glv

#endif  // GLVORTEX_SNAPSHOT_IO_HPP
