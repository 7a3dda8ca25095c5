#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "caltec/tensor.hpp"

namespace caltec::npy {

enum class ErrorKind {
  io,
  bad_magic,
  unsupported_version,
  bad_header,
  fortran_order,
  wrong_rank,
  unsupported_dtype,
  truncated,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {
  }
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Element types this project reads and writes. Always little-endian on disk.
enum class DType { f32, f64, u8 };

std::size_t element_size(DType dtype) noexcept;

/// A C-order array held as raw little-endian bytes.
struct Array {
  std::vector<std::size_t> shape;
  DType dtype = DType::f64;
  std::vector<std::byte> bytes;

  std::size_t count() const noexcept;
};

/// Parse a complete .npy image (versions 1.0, 2.0 and 3.0 are accepted).
Array parse(std::span<const std::byte> image);

/// Encode as NPY v1.0; the header is padded so data starts on a 64-byte boundary.
std::vector<std::byte> serialize(const Array& array);

Array read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Array& array);

std::vector<std::byte> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

} // namespace caltec::npy

namespace caltec {

struct TensorFile {
  FeatureTensor tensor;
  npy::DType element_type = npy::DType::f64;
};

/// Read a 3-D float32/float64 C-order array as an (h, w, c) tensor.
/// Values are widened to double.
TensorFile read_tensor_file(const std::filesystem::path& path);

FeatureTensor load_tensor(const std::filesystem::path& path);

/// float64 output round-trips exactly; float32 output rounds to nearest.
void save_tensor(const FeatureTensor& tensor, const std::filesystem::path& path,
                 npy::DType element_type = npy::DType::f64);

/// In-memory variants used by the file helpers.
FeatureTensor tensor_from_array(const npy::Array& array);
npy::Array tensor_to_array(const FeatureTensor& tensor, npy::DType element_type);

} // namespace caltec
