#include "strawkit/ply.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "strawkit/error.hpp"
#include "strawkit/numfmt.hpp"

namespace strawkit::ply {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::MalformedPly, msg); }

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

template <typename T>
T byteswap_value(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
double read_raw(std::istream& in, bool swap, std::streamoff& offset) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    fail("unexpected end of binary data at byte " + std::to_string(offset));
  offset += static_cast<std::streamoff>(sizeof(T));
  if (swap) v = byteswap_value(v);
  return static_cast<double>(v);
}

double read_binary(std::istream& in, ScalarType t, bool swap, std::streamoff& offset) {
  switch (t) {
    case ScalarType::Int8: return read_raw<std::int8_t>(in, swap, offset);
    case ScalarType::UInt8: return read_raw<std::uint8_t>(in, swap, offset);
    case ScalarType::Int16: return read_raw<std::int16_t>(in, swap, offset);
    case ScalarType::UInt16: return read_raw<std::uint16_t>(in, swap, offset);
    case ScalarType::Int32: return read_raw<std::int32_t>(in, swap, offset);
    case ScalarType::UInt32: return read_raw<std::uint32_t>(in, swap, offset);
    case ScalarType::Float32: return read_raw<float>(in, swap, offset);
    case ScalarType::Float64: return read_raw<double>(in, swap, offset);
  }
  return 0.0;
}

template <typename T>
void write_raw(std::ostream& out, double value, bool swap) {
  T v = static_cast<T>(value);
  if (swap) v = byteswap_value(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void write_binary(std::ostream& out, ScalarType t, double value, bool swap) {
  switch (t) {
    case ScalarType::Int8: write_raw<std::int8_t>(out, value, swap); break;
    case ScalarType::UInt8: write_raw<std::uint8_t>(out, value, swap); break;
    case ScalarType::Int16: write_raw<std::int16_t>(out, value, swap); break;
    case ScalarType::UInt16: write_raw<std::uint16_t>(out, value, swap); break;
    case ScalarType::Int32: write_raw<std::int32_t>(out, value, swap); break;
    case ScalarType::UInt32: write_raw<std::uint32_t>(out, value, swap); break;
    case ScalarType::Float32: write_raw<float>(out, value, swap); break;
    case ScalarType::Float64: write_raw<double>(out, value, swap); break;
  }
}

std::string format_ascii(ScalarType t, double v) {
  switch (t) {
    case ScalarType::Float32: return format_double(static_cast<double>(static_cast<float>(v)));
    case ScalarType::Float64: return format_double(v);
    default: return std::to_string(static_cast<long long>(v));
  }
}

double parse_number(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail("invalid number '" + tok + "' on line " + std::to_string(line_no));
  return v;
}

bool host_is_little() { return std::endian::native == std::endian::little; }

}  // namespace

std::optional<ScalarType> parse_scalar_type(std::string_view n) {
  if (n == "char" || n == "int8") return ScalarType::Int8;
  if (n == "uchar" || n == "uint8") return ScalarType::UInt8;
  if (n == "short" || n == "int16") return ScalarType::Int16;
  if (n == "ushort" || n == "uint16") return ScalarType::UInt16;
  if (n == "int" || n == "int32") return ScalarType::Int32;
  if (n == "uint" || n == "uint32") return ScalarType::UInt32;
  if (n == "float" || n == "float32") return ScalarType::Float32;
  if (n == "double" || n == "float64") return ScalarType::Float64;
  return std::nullopt;
}

std::string_view scalar_type_name(ScalarType t) {
  switch (t) {
    case ScalarType::Int8: return "char";
    case ScalarType::UInt8: return "uchar";
    case ScalarType::Int16: return "short";
    case ScalarType::UInt16: return "ushort";
    case ScalarType::Int32: return "int";
    case ScalarType::UInt32: return "uint";
    case ScalarType::Float32: return "float";
    case ScalarType::Float64: return "double";
  }
  return "double";
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 8;
}

int Element::find(std::string_view prop) const {
  for (std::size_t i = 0; i < properties.size(); ++i)
    if (properties[i].name == prop) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& Element::column(std::string_view prop) const {
  const int i = find(prop);
  if (i < 0 || properties[static_cast<std::size_t>(i)].is_list)
    fail("element '" + name + "' has no scalar property '" + std::string(prop) + "'");
  return columns[static_cast<std::size_t>(i)];
}

const std::vector<std::vector<double>>& Element::list(std::string_view prop) const {
  const int i = find(prop);
  if (i < 0 || !properties[static_cast<std::size_t>(i)].is_list)
    fail("element '" + name + "' has no list property '" + std::string(prop) + "'");
  return lists[static_cast<std::size_t>(i)];
}

const Element* File::find(std::string_view name) const {
  for (const auto& e : elements)
    if (e.name == name) return &e;
  return nullptr;
}

Element& File::add_element(std::string name, std::size_t count) {
  elements.push_back(Element{std::move(name), count, {}, {}, {}});
  return elements.back();
}

void add_column(Element& e, std::string name, ScalarType type, std::vector<double> values) {
  if (values.size() != e.count) fail("column size mismatch for '" + name + "'");
  e.properties.push_back(Property{std::move(name), type, false, ScalarType::UInt8});
  e.columns.push_back(std::move(values));
  e.lists.emplace_back();
}

void add_list(Element& e, std::string name, ScalarType count_type, ScalarType type,
              std::vector<std::vector<double>> values) {
  if (values.size() != e.count) fail("list size mismatch for '" + name + "'");
  e.properties.push_back(Property{std::move(name), type, true, count_type});
  e.columns.emplace_back();
  e.lists.push_back(std::move(values));
}

File read(std::istream& in) {
  File file;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") fail("missing 'ply' magic on line 1");
  bool have_format = false;
  bool header_done = false;
  while (next_line()) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() < 2) fail("bad format line " + std::to_string(line_no));
      if (tok[1] == "ascii") file.format = Format::Ascii;
      else if (tok[1] == "binary_little_endian") file.format = Format::BinaryLittleEndian;
      else if (tok[1] == "binary_big_endian") file.format = Format::BinaryBigEndian;
      else fail("unknown format '" + tok[1] + "'");
      have_format = true;
    } else if (tok[0] == "comment" || tok[0] == "obj_info") {
      file.comments.push_back(line.size() > 8 ? line.substr(8) : std::string());
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail("bad element line " + std::to_string(line_no));
      std::size_t count = 0;
      auto res = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (res.ec != std::errc()) fail("bad element count on line " + std::to_string(line_no));
      file.add_element(tok[1], count);
    } else if (tok[0] == "property") {
      if (file.elements.empty()) fail("property before element on line " + std::to_string(line_no));
      Element& e = file.elements.back();
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = parse_scalar_type(tok[2]);
        auto vt = parse_scalar_type(tok[3]);
        if (!ct || !vt) fail("bad list types on line " + std::to_string(line_no));
        p = Property{tok[4], *vt, true, *ct};
      } else if (tok.size() == 3) {
        auto t = parse_scalar_type(tok[1]);
        if (!t) fail("unknown type '" + tok[1] + "' on line " + std::to_string(line_no));
        p = Property{tok[2], *t, false, ScalarType::UInt8};
      } else {
        fail("bad property line " + std::to_string(line_no));
      }
      e.properties.push_back(p);
      e.columns.emplace_back();
      e.lists.emplace_back();
    } else {
      fail("unknown header keyword '" + tok[0] + "' on line " + std::to_string(line_no));
    }
  }
  if (!header_done) fail("missing end_header");
  if (!have_format) fail("missing format line");

  for (auto& e : file.elements) {
    for (std::size_t p = 0; p < e.properties.size(); ++p) {
      if (e.properties[p].is_list) e.lists[p].reserve(e.count);
      else e.columns[p].reserve(e.count);
    }
  }

  if (file.format == Format::Ascii) {
    for (auto& e : file.elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        if (!next_line()) fail("unexpected end of file in element '" + e.name + "'");
        const auto tok = split_ws(line);
        std::size_t t = 0;
        auto take = [&]() -> double {
          if (t >= tok.size()) fail("too few values on line " + std::to_string(line_no));
          return parse_number(tok[t++], line_no);
        };
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          if (e.properties[p].is_list) {
            const double n = take();
            if (n < 0 || n != static_cast<double>(static_cast<long long>(n)))
              fail("bad list count on line " + std::to_string(line_no));
            std::vector<double> vals(static_cast<std::size_t>(n));
            for (auto& v : vals) v = take();
            e.lists[p].push_back(std::move(vals));
          } else {
            e.columns[p].push_back(take());
          }
        }
        if (t != tok.size()) fail("too many values on line " + std::to_string(line_no));
      }
    }
  } else {
    const bool swap = (file.format == Format::BinaryLittleEndian) != host_is_little();
    std::streamoff offset = in.tellg();
    for (auto& e : file.elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const Property& prop = e.properties[p];
          if (prop.is_list) {
            const double n = read_binary(in, prop.count_type, swap, offset);
            if (n < 0) fail("negative list count at byte " + std::to_string(offset));
            std::vector<double> vals(static_cast<std::size_t>(n));
            for (auto& v : vals) v = read_binary(in, prop.type, swap, offset);
            e.lists[p].push_back(std::move(vals));
          } else {
            e.columns[p].push_back(read_binary(in, prop.type, swap, offset));
          }
        }
      }
    }
  }
  return file;
}

File read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read(in);
}

void write(std::ostream& out, const File& file) {
  out << "ply\nformat ";
  switch (file.format) {
    case Format::Ascii: out << "ascii"; break;
    case Format::BinaryLittleEndian: out << "binary_little_endian"; break;
    case Format::BinaryBigEndian: out << "binary_big_endian"; break;
  }
  out << " 1.0\n";
  for (const auto& c : file.comments) out << "comment " << c << '\n';
  for (const auto& e : file.elements) {
    out << "element " << e.name << ' ' << e.count << '\n';
    for (const auto& p : e.properties) {
      if (p.is_list)
        out << "property list " << scalar_type_name(p.count_type) << ' ' << scalar_type_name(p.type)
            << ' ' << p.name << '\n';
      else
        out << "property " << scalar_type_name(p.type) << ' ' << p.name << '\n';
    }
  }
  out << "end_header\n";

  if (file.format == Format::Ascii) {
    for (const auto& e : file.elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        bool first = true;
        auto emit = [&](const std::string& s) {
          if (!first) out << ' ';
          out << s;
          first = false;
        };
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const Property& prop = e.properties[p];
          if (prop.is_list) {
            const auto& vals = e.lists[p][r];
            emit(std::to_string(vals.size()));
            for (double v : vals) emit(format_ascii(prop.type, v));
          } else {
            emit(format_ascii(prop.type, e.columns[p][r]));
          }
        }
        out << '\n';
      }
    }
  } else {
    const bool swap = (file.format == Format::BinaryLittleEndian) != host_is_little();
    for (const auto& e : file.elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const Property& prop = e.properties[p];
          if (prop.is_list) {
            const auto& vals = e.lists[p][r];
            write_binary(out, prop.count_type, static_cast<double>(vals.size()), swap);
            for (double v : vals) write_binary(out, prop.type, v, swap);
          } else {
            write_binary(out, prop.type, e.columns[p][r], swap);
          }
        }
      }
    }
  }
}

void write(const std::filesystem::path& path, const File& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write(out, file);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace strawkit::ply
