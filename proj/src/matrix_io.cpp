#include "kam/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kam/errors.hpp"

namespace kam {
namespace {

constexpr char kMagic[4] = {'K', 'M', 'A', 'T'};
constexpr std::uint32_t kFloat64 = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw IoError("truncated matrix header");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix<double>& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFloat64);
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  for (double v : m.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix<double> read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError(path.string() + ": not a matrix dump");
  if (get<std::uint32_t>(in) != kFloat64)
    throw IoError(path.string() + ": unsupported dtype");
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  Matrix<double> m(rows, cols);
  for (double& v : m.data()) v = std::bit_cast<double>(get<std::uint64_t>(in));
  return m;
}

}  // namespace kam
