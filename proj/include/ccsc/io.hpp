#pragma once

// Binary formats.
//
// CIMG raster (little-endian):
//   offset 0   4 bytes  magic "CIMG"
//   offset 4   u32      version (1)
//   offset 8   u64      rows
//   offset 16  u64      cols
//   offset 24  rows*cols pairs of f64 (real, imag), row-major
//
// CDIC dictionary (little-endian):
//   offset 0   4 bytes  magic "CDIC"
//   offset 4   u32      version (1)
//   offset 8   u64      num_filters M
//   offset 16  u64      filter_size L
//   offset 24  M*L*L pairs of f64 (real, imag); filter-major, each row-major
//
// Files are written to a sibling temporary and renamed into place.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ccsc/error.hpp"
#include "ccsc/image.hpp"

namespace ccsc::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 24;

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void put_complex(std::vector<std::uint8_t>& out, const Complex& z) {
  put_le<double>(out, z.real());
  put_le<double>(out, z.imag());
}

inline Complex get_complex(const std::uint8_t* p) {
  return {get_le<double>(p), get_le<double>(p + 8)};
}

inline std::vector<std::uint8_t> header(std::string_view magic, std::uint64_t a, std::uint64_t b) {
  std::vector<std::uint8_t> out(magic.begin(), magic.end());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, a);
  put_le<std::uint64_t>(out, b);
  return out;
}

struct Header {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

inline Header parse_header(const std::vector<std::uint8_t>& bytes, std::string_view magic,
                           const std::string& name) {
  if (bytes.size() < kHeaderBytes) throw FormatError(name + ": truncated header");
  if (std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw FormatError(name + ": bad magic, expected " + std::string(magic));
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kFormatVersion) {
    throw FormatError(name + ": unsupported version " + std::to_string(version));
  }
  return {get_le<std::uint64_t>(bytes.data() + 8), get_le<std::uint64_t>(bytes.data() + 16)};
}

inline void check_payload(const std::vector<std::uint8_t>& bytes, std::uint64_t count,
                          const std::string& name) {
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 16;
  if (count > limit || bytes.size() - kHeaderBytes != count * 16) {
    throw FormatError(name + ": payload is " + std::to_string(bytes.size() - kHeaderBytes) +
                      " bytes, header implies " + std::to_string(count) + " samples");
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

/// Writes to `path.tmp` then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline std::vector<std::uint8_t> encode_raster(const ComplexImage& img) {
  std::vector<std::uint8_t> out = detail::header("CIMG", img.rows(), img.cols());
  out.reserve(kHeaderBytes + 16 * img.size());
  for (const auto& z : img.span()) detail::put_complex(out, z);
  return out;
}

inline ComplexImage decode_raster(const std::vector<std::uint8_t>& bytes,
                                  const std::string& name = "raster") {
  const auto h = detail::parse_header(bytes, "CIMG", name);
  if (h.a != 0 && h.b > std::numeric_limits<std::uint64_t>::max() / h.a) {
    throw FormatError(name + ": dimensions overflow");
  }
  detail::check_payload(bytes, h.a * h.b, name);
  std::vector<Complex> data(h.a * h.b);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = detail::get_complex(bytes.data() + kHeaderBytes + 16 * i);
  }
  return ComplexImage(h.a, h.b, std::move(data));
}

inline void write_raster(const std::filesystem::path& path, const ComplexImage& img) {
  write_file_atomic(path, encode_raster(img));
}

inline ComplexImage read_raster(const std::filesystem::path& path) {
  return decode_raster(read_file(path), path.string());
}

/// Real image stored as a CIMG raster with zero imaginary part.
inline void write_real_raster(const std::filesystem::path& path, const RealImage& img) {
  ComplexImage z(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) z[i] = img[i];
  write_raster(path, z);
}

inline std::vector<std::uint8_t> encode_dictionary(const FilterBank& bank) {
  std::vector<std::uint8_t> out = detail::header("CDIC", bank.num_filters(), bank.filter_size());
  for (const auto& f : bank.filters()) {
    for (const auto& z : f.span()) detail::put_complex(out, z);
  }
  return out;
}

struct DictionaryFile {
  FilterBank bank;
  std::vector<std::string> warnings;  ///< e.g. filters that are not unit norm
};

inline DictionaryFile decode_dictionary(const std::vector<std::uint8_t>& bytes,
                                        const std::string& name = "dictionary") {
  const auto h = detail::parse_header(bytes, "CDIC", name);
  const std::uint64_t m = h.a;
  const std::uint64_t l = h.b;
  if (m == 0 || l == 0) throw FormatError(name + ": empty dictionary");
  if (l > (1u << 20) || m > std::numeric_limits<std::uint64_t>::max() / (l * l)) {
    throw FormatError(name + ": dimensions overflow");
  }
  detail::check_payload(bytes, m * l * l, name);
  std::vector<ComplexImage> filters;
  filters.reserve(m);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (std::uint64_t k = 0; k < m; ++k) {
    ComplexImage f(l, l);
    for (auto& z : f.span()) {
      z = detail::get_complex(p);
      p += 16;
    }
    filters.push_back(std::move(f));
  }
  DictionaryFile out{FilterBank(std::move(filters)), {}};
  for (std::size_t k = 0; k < out.bank.num_filters(); ++k) {
    const double n = l2_norm(out.bank[k].span());
    if (!(std::abs(n - 1.0) <= 1e-8)) {
      std::ostringstream msg;
      msg << name << ": filter " << k << " has norm " << std::setprecision(17) << n;
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

inline void write_dictionary(const std::filesystem::path& path, const FilterBank& bank) {
  write_file_atomic(path, encode_dictionary(bank));
}

inline DictionaryFile read_dictionary(const std::filesystem::path& path) {
  return decode_dictionary(read_file(path), path.string());
}

/// CSV interchange: one line per image row, each sample written as
/// "re,im" pairs separated by commas, 17 significant digits.
inline std::string raster_to_csv(const ComplexImage& img) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      if (c) out << ',';
      out << img(r, c).real() << ',' << img(r, c).imag();
    }
    out << '\n';
  }
  return out.str();
}

inline ComplexImage raster_from_csv(const std::string& text) {
  std::vector<Complex> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        throw FormatError("csv: cannot parse '" + field + "' on row " + std::to_string(rows));
      }
    }
    if (values.size() % 2 != 0) throw FormatError("csv: odd number of fields on a row");
    const std::size_t n = values.size() / 2;
    if (rows == 0) cols = n;
    if (n != cols || n == 0) throw FormatError("csv: ragged rows");
    for (std::size_t i = 0; i < n; ++i) data.emplace_back(values[2 * i], values[2 * i + 1]);
    ++rows;
  }
  if (rows == 0) throw FormatError("csv: no data");
  return ComplexImage(rows, cols, std::move(data));
}

}  // namespace ccsc::io
