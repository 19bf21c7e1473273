#include "emrelax/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "emrelax/errors.hpp"

namespace emrelax {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'E', 'M', 'R', 'S', 'N', 'A', 'P', '1'};

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail(ErrorKind::Io, "truncated snapshot");
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const std::vector<ScalarField>& components,
                    const std::string& metadata) {
  require(!components.empty(), "snapshot needs at least one component");
  const PeriodicGrid& g = components.front().grid();
  for (const auto& c : components) require_same_grid(g, c.grid(), "write_snapshot");

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.points_per_dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(components.size()));
  put<std::uint32_t>(os, 0u);
  put<double>(os, g.domain_length());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(metadata.size()));
  os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  for (const auto& c : components)
    os.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
  if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) fail(ErrorKind::Io, path.string() + " is not a field snapshot");

  const auto dim = get<std::uint32_t>(is);
  const auto n = get<std::uint32_t>(is);
  const auto ncomp = get<std::uint32_t>(is);
  (void)get<std::uint32_t>(is);
  const auto length = get<double>(is);
  const auto meta_len = get<std::uint64_t>(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (!is) fail(ErrorKind::Io, "truncated snapshot metadata");

  PeriodicGrid grid(static_cast<int>(dim), static_cast<int>(n), length);
  SnapshotData out{grid, {}, meta.empty() ? "{}" : meta};
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    std::vector<double> values(grid.size());
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) fail(ErrorKind::Io, "truncated snapshot samples");
    out.components.emplace_back(grid, std::move(values));
  }
  return out;
}

void append_components(std::vector<ScalarField>& out, const VectorField& v) {
  for (const auto& c : v) out.push_back(c);
}

}  // namespace emrelax
