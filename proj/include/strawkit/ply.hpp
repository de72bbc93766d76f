#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace strawkit::ply {

enum class Format { Ascii, BinaryLittleEndian, BinaryBigEndian };

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_scalar_type(std::string_view name);
std::string_view scalar_type_name(ScalarType type);
std::size_t scalar_size(ScalarType type);

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float64;
  bool is_list = false;
  ScalarType count_type = ScalarType::UInt8;
};

/// Element data is stored column-wise as doubles; every PLY scalar type up to
/// 32-bit ints and float64 is represented exactly.
struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
  std::vector<std::vector<double>> columns;             // scalar properties
  std::vector<std::vector<std::vector<double>>> lists;  // list properties (parallel to properties)

  [[nodiscard]] int find(std::string_view prop) const;
  [[nodiscard]] bool has(std::string_view prop) const { return find(prop) >= 0; }
  [[nodiscard]] const std::vector<double>& column(std::string_view prop) const;
  [[nodiscard]] const std::vector<std::vector<double>>& list(std::string_view prop) const;
};

struct File {
  Format format = Format::Ascii;
  std::vector<std::string> comments;
  std::vector<Element> elements;

  [[nodiscard]] const Element* find(std::string_view name) const;
  Element& add_element(std::string name, std::size_t count);
};

/// Throws Error(MalformedPly) with byte offset or line number on any violation.
File read(std::istream& in);
File read(const std::filesystem::path& path);

void write(std::ostream& out, const File& file);
void write(const std::filesystem::path& path, const File& file);

/// Adds a scalar property column to an element.
void add_column(Element& element, std::string name, ScalarType type, std::vector<double> values);
void add_list(Element& element, std::string name, ScalarType count_type, ScalarType type,
              std::vector<std::vector<double>> values);

}  // namespace strawkit::ply
