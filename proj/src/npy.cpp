#include "caltec/npy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

namespace caltec::npy {

namespace {

constexpr std::array<char, 6> magic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string_view descr_of(DType dtype)
{
  switch (dtype) {
  case DType::f32:
    return "<f4";
  case DType::f64:
    return "<f8";
  case DType::u8:
    return "|u1";
  }
  return "";
}

DType parse_descr(std::string_view descr)
{
  if (descr == "<f4")
    return DType::f32;
  if (descr == "<f8")
    return DType::f64;
  if (descr == "|u1" || descr == "<u1" || descr == "u1")
    return DType::u8;
  throw Error(ErrorKind::unsupported_dtype, "element type '" + std::string(descr) + "'");
}

void skip_space(std::string_view s, std::size_t& pos)
{
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
}

// Locate the value following 'key': in a python dict literal.
std::size_t value_start(std::string_view header, std::string_view key)
{
  for (char quote : {'\'', '"'}) {
    std::string needle;
    needle += quote;
    needle += key;
    needle += quote;
    const auto at = header.find(needle);
    if (at == std::string_view::npos)
      continue;
    std::size_t pos = at + needle.size();
    skip_space(header, pos);
    if (pos >= header.size() || header[pos] != ':')
      throw Error(ErrorKind::bad_header, "missing ':' after " + std::string(key));
    ++pos;
    skip_space(header, pos);
    return pos;
  }
  throw Error(ErrorKind::bad_header, "missing key '" + std::string(key) + "'");
}

struct Header {
  DType dtype = DType::f64;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

Header parse_header(std::string_view text)
{
  Header h;

  std::size_t pos = value_start(text, "descr");
  if (pos >= text.size() || (text[pos] != '\'' && text[pos] != '"'))
    throw Error(ErrorKind::bad_header, "descr is not a string");
  const char quote = text[pos];
  const auto close = text.find(quote, pos + 1);
  if (close == std::string_view::npos)
    throw Error(ErrorKind::bad_header, "unterminated descr");
  h.dtype = parse_descr(text.substr(pos + 1, close - pos - 1));

  pos = value_start(text, "fortran_order");
  if (text.substr(pos, 4) == "True")
    h.fortran_order = true;
  else if (text.substr(pos, 5) == "False")
    h.fortran_order = false;
  else
    throw Error(ErrorKind::bad_header, "fortran_order is not a bool");

  pos = value_start(text, "shape");
  if (pos >= text.size() || text[pos] != '(')
    throw Error(ErrorKind::bad_header, "shape is not a tuple");
  const auto end = text.find(')', pos);
  if (end == std::string_view::npos)
    throw Error(ErrorKind::bad_header, "unterminated shape");
  std::string_view dims = text.substr(pos + 1, end - pos - 1);
  std::size_t p = 0;
  while (true) {
    skip_space(dims, p);
    if (p >= dims.size())
      break;
    if (!std::isdigit(static_cast<unsigned char>(dims[p])))
      throw Error(ErrorKind::bad_header, "malformed shape");
    std::size_t value = 0;
    while (p < dims.size() && std::isdigit(static_cast<unsigned char>(dims[p])))
      value = value * 10 + static_cast<std::size_t>(dims[p++] - '0');
    h.shape.push_back(value);
    skip_space(dims, p);
    if (p < dims.size()) {
      if (dims[p] != ',')
        throw Error(ErrorKind::bad_header, "malformed shape");
      ++p;
    }
  }
  return h;
}

} // namespace

const char* to_string(ErrorKind kind) noexcept
{
  switch (kind) {
  case ErrorKind::io:
    return "io error";
  case ErrorKind::bad_magic:
    return "not an NPY file";
  case ErrorKind::unsupported_version:
    return "unsupported NPY version";
  case ErrorKind::bad_header:
    return "malformed NPY header";
  case ErrorKind::fortran_order:
    return "Fortran-ordered arrays are not supported";
  case ErrorKind::wrong_rank:
    return "wrong array rank";
  case ErrorKind::unsupported_dtype:
    return "unsupported element type";
  case ErrorKind::truncated:
    return "truncated NPY file";
  }
  return "npy error";
}

std::size_t element_size(DType dtype) noexcept
{
  switch (dtype) {
  case DType::f32:
    return 4;
  case DType::f64:
    return 8;
  case DType::u8:
    return 1;
  }
  return 0;
}

std::size_t Array::count() const noexcept
{
  std::size_t n = 1;
  for (auto d : shape)
    n *= d;
  return n;
}

Array parse(std::span<const std::byte> image)
{
  if (image.size() < magic.size() + 2)
    throw Error(magic.size() <= image.size() &&
                        std::memcmp(image.data(), magic.data(), magic.size()) == 0
                    ? ErrorKind::truncated
                    : ErrorKind::bad_magic,
                "file too short");
  if (std::memcmp(image.data(), magic.data(), magic.size()) != 0)
    throw Error(ErrorKind::bad_magic, "magic string mismatch");

  const auto major = static_cast<unsigned>(image[6]);
  std::size_t header_len = 0;
  std::size_t preamble = 0;
  if (major == 1) {
    preamble = 10;
    if (image.size() < preamble)
      throw Error(ErrorKind::truncated, "header length missing");
    header_len = static_cast<std::size_t>(image[8]) | (static_cast<std::size_t>(image[9]) << 8);
  } else if (major == 2 || major == 3) {
    preamble = 12;
    if (image.size() < preamble)
      throw Error(ErrorKind::truncated, "header length missing");
    for (int b = 3; b >= 0; --b)
      header_len = (header_len << 8) | static_cast<std::size_t>(image[8 + b]);
  } else {
    throw Error(ErrorKind::unsupported_version, "major version " + std::to_string(major));
  }
  if (image.size() < preamble + header_len)
    throw Error(ErrorKind::truncated, "header extends past end of file");

  const std::string_view text(reinterpret_cast<const char*>(image.data() + preamble), header_len);
  const Header header = parse_header(text);
  if (header.fortran_order)
    throw Error(ErrorKind::fortran_order, "array is stored column-major");

  Array array;
  array.shape = header.shape;
  array.dtype = header.dtype;
  const std::size_t nbytes = array.count() * element_size(array.dtype);
  const auto data = image.subspan(preamble + header_len);
  if (data.size() < nbytes)
    throw Error(ErrorKind::truncated, "expected " + std::to_string(nbytes) + " data bytes, found " +
                                          std::to_string(data.size()));
  array.bytes.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(nbytes));
  return array;
}

std::vector<std::byte> serialize(const Array& array)
{
  std::string header = "{'descr': '";
  header += descr_of(array.dtype);
  header += "', 'fortran_order': False, 'shape': (";
  for (std::size_t d = 0; d < array.shape.size(); ++d) {
    header += std::to_string(array.shape[d]);
    if (array.shape.size() == 1 || d + 1 < array.shape.size())
      header += ",";
    if (d + 1 < array.shape.size())
      header += " ";
  }
  header += "), }";
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';
  if (header.size() > 0xffff)
    throw Error(ErrorKind::bad_header, "header too long for NPY v1.0");

  std::vector<std::byte> out;
  out.reserve(10 + header.size() + array.bytes.size());
  for (char ch : magic)
    out.push_back(static_cast<std::byte>(ch));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  out.push_back(static_cast<std::byte>(header.size() & 0xff));
  out.push_back(static_cast<std::byte>(header.size() >> 8));
  for (char ch : header)
    out.push_back(static_cast<std::byte>(ch));
  out.insert(out.end(), array.bytes.begin(), array.bytes.end());
  return out;
}

std::vector<std::byte> read_bytes(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorKind::io, "write failed for " + path.string());
}

Array read_file(const std::filesystem::path& path)
{
  const auto bytes = read_bytes(path);
  return parse(bytes);
}

void write_file(const std::filesystem::path& path, const Array& array)
{
  write_bytes(path, serialize(array));
}

} // namespace caltec::npy

namespace caltec {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
T load_le(const std::byte* src)
{
  std::array<std::byte, sizeof(T)> buf;
  std::memcpy(buf.data(), src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf.begin(), buf.end());
  return std::bit_cast<T>(buf);
}

template <typename T>
void store_le(T value, std::byte* dst)
{
  auto buf = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf.begin(), buf.end());
  std::memcpy(dst, buf.data(), sizeof(T));
}

} // namespace

FeatureTensor tensor_from_array(const npy::Array& array)
{
  if (array.shape.size() != 3)
    throw npy::Error(npy::ErrorKind::wrong_rank,
                     "expected 3 dimensions (h, w, c), found " + std::to_string(array.shape.size()));
  if (array.dtype == npy::DType::u8)
    throw npy::Error(npy::ErrorKind::unsupported_dtype, "tensor files must be float32 or float64");

  const Shape shape{array.shape[0], array.shape[1], array.shape[2]};
  std::vector<double> data(array.count());
  const std::byte* src = array.bytes.data();
  if (array.dtype == npy::DType::f32) {
    for (std::size_t n = 0; n < data.size(); ++n)
      data[n] = static_cast<double>(load_le<float>(src + 4 * n));
  } else {
    for (std::size_t n = 0; n < data.size(); ++n)
      data[n] = load_le<double>(src + 8 * n);
  }
  return FeatureTensor(shape, std::move(data));
}

npy::Array tensor_to_array(const FeatureTensor& tensor, npy::DType element_type)
{
  if (element_type == npy::DType::u8)
    throw npy::Error(npy::ErrorKind::unsupported_dtype, "tensor files must be float32 or float64");
  npy::Array array;
  array.shape = {tensor.height(), tensor.width(), tensor.channels()};
  array.dtype = element_type;
  array.bytes.resize(tensor.size() * npy::element_size(element_type));
  const auto values = tensor.values();
  std::byte* dst = array.bytes.data();
  if (element_type == npy::DType::f32) {
    for (std::size_t n = 0; n < values.size(); ++n)
      store_le(static_cast<float>(values[n]), dst + 4 * n);
  } else {
    for (std::size_t n = 0; n < values.size(); ++n)
      store_le(values[n], dst + 8 * n);
  }
  return array;
}

TensorFile read_tensor_file(const std::filesystem::path& path)
{
  const npy::Array array = npy::read_file(path);
  return {tensor_from_array(array), array.dtype};
}

FeatureTensor load_tensor(const std::filesystem::path& path)
{
  return read_tensor_file(path).tensor;
}

void save_tensor(const FeatureTensor& tensor, const std::filesystem::path& path,
                 npy::DType element_type)
{
  npy::write_file(path, tensor_to_array(tensor, element_type));
}

} // namespace caltec
