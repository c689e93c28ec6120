#include "affordfit/io/ply.hpp"

#include "affordfit/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

namespace affordfit {

namespace {

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

Scalar parse_scalar(const std::string& name) {
  static const std::unordered_map<std::string, Scalar> table = {
      {"char", Scalar::i8},    {"int8", Scalar::i8},     {"uchar", Scalar::u8},   {"uint8", Scalar::u8},
      {"short", Scalar::i16},  {"int16", Scalar::i16},   {"ushort", Scalar::u16}, {"uint16", Scalar::u16},
      {"int", Scalar::i32},    {"int32", Scalar::i32},   {"uint", Scalar::u32},   {"uint32", Scalar::u32},
      {"float", Scalar::f32},  {"float32", Scalar::f32}, {"double", Scalar::f64}, {"float64", Scalar::f64}};
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorCode::SchemaError, "unknown PLY scalar type '" + name + "'");
  return it->second;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::i8:
    case Scalar::u8: return 1;
    case Scalar::i16:
    case Scalar::u16: return 2;
    case Scalar::i32:
    case Scalar::u32:
    case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

template <typename T>
double load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(Scalar s, const char* p) {
  switch (s) {
    case Scalar::i8: return load<std::int8_t>(p);
    case Scalar::u8: return load<std::uint8_t>(p);
    case Scalar::i16: return load<std::int16_t>(p);
    case Scalar::u16: return load<std::uint16_t>(p);
    case Scalar::i32: return load<std::int32_t>(p);
    case Scalar::u32: return load<std::uint32_t>(p);
    case Scalar::f32: return load<float>(p);
    case Scalar::f64: return load<double>(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::f32;
  bool is_list = false;
  Scalar count_type = Scalar::u8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
  // rows[i][p] holds scalar values; list properties are flattened into lists[i].
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<int>> lists;
};

struct PlyData {
  std::vector<Element> elements;
  const Element* find(const std::string& name) const {
    for (const auto& e : elements)
      if (e.name == name) return &e;
    return nullptr;
  }
};

PlyData read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(ErrorCode::SyntaxError, path.string() + ": missing PLY magic");

  enum class Format { ascii, binary_le } format = Format::ascii;
  PlyData data;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") format = Format::ascii;
      else if (fmt == "binary_little_endian") format = Format::binary_le;
      else throw Error(ErrorCode::SchemaError, path.string() + ": unsupported PLY format " + fmt);
    } else if (keyword == "element") {
      Element e;
      ss >> e.name >> e.count;
      data.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (data.elements.empty()) throw Error(ErrorCode::SyntaxError, path.string() + ": property before element");
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = parse_scalar(count_type);
        p.type = parse_scalar(item_type);
      } else {
        p.type = parse_scalar(type);
        ss >> p.name;
      }
      data.elements.back().properties.push_back(p);
    } else if (keyword == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw Error(ErrorCode::SyntaxError, path.string() + ": truncated PLY header");

  for (auto& e : data.elements) {
    e.rows.assign(e.count, {});
    e.lists.assign(e.count, {});
    for (std::size_t i = 0; i < e.count; ++i) {
      auto& row = e.rows[i];
      row.reserve(e.properties.size());
      if (format == Format::ascii) {
        if (!std::getline(in, line)) throw Error(ErrorCode::SyntaxError, path.string() + ": truncated PLY body");
        std::istringstream ss(line);
        for (const auto& p : e.properties) {
          double v = 0.0;
          if (!(ss >> v)) throw Error(ErrorCode::SyntaxError, path.string() + ": malformed PLY row");
          if (p.is_list) {
            const int n = static_cast<int>(v);
            for (int k = 0; k < n; ++k) {
              double item = 0.0;
              if (!(ss >> item)) throw Error(ErrorCode::SyntaxError, path.string() + ": malformed PLY list");
              e.lists[i].push_back(static_cast<int>(item));
            }
            row.push_back(n);
          } else {
            row.push_back(v);
          }
        }
      } else {
        char buf[8];
        for (const auto& p : e.properties) {
          const Scalar t = p.is_list ? p.count_type : p.type;
          if (!in.read(buf, static_cast<std::streamsize>(scalar_size(t))))
            throw Error(ErrorCode::SyntaxError, path.string() + ": truncated PLY body");
          const double v = decode(t, buf);
          if (p.is_list) {
            const int n = static_cast<int>(v);
            for (int k = 0; k < n; ++k) {
              if (!in.read(buf, static_cast<std::streamsize>(scalar_size(p.type))))
                throw Error(ErrorCode::SyntaxError, path.string() + ": truncated PLY list");
              e.lists[i].push_back(static_cast<int>(decode(p.type, buf)));
            }
            row.push_back(n);
          } else {
            row.push_back(v);
          }
        }
      }
    }
  }
  return data;
}

int property_index(const Element& e, const std::string& name) {
  for (std::size_t i = 0; i < e.properties.size(); ++i)
    if (e.properties[i].name == name && !e.properties[i].is_list) return static_cast<int>(i);
  return -1;
}

std::vector<Vec3> vertex_positions(const Element& v, const std::filesystem::path& path) {
  const int ix = property_index(v, "x"), iy = property_index(v, "y"), iz = property_index(v, "z");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::SchemaError, path.string() + ": vertex lacks x/y/z");
  std::vector<Vec3> out;
  out.reserve(v.count);
  for (const auto& row : v.rows) out.emplace_back(row[ix], row[iy], row[iz]);
  return out;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_header(std::ostream& out, bool binary) {
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
}

}  // namespace

PointCloud read_ply_cloud(const std::filesystem::path& path) {
  const PlyData data = read_ply(path);
  const Element* v = data.find("vertex");
  if (!v) throw Error(ErrorCode::SchemaError, path.string() + ": no vertex element");
  PointCloud cloud;
  cloud.points = vertex_positions(*v, path);
  const int il = property_index(*v, "part_label");
  if (il >= 0) {
    cloud.labels.reserve(v->count);
    for (const auto& row : v->rows) cloud.labels.push_back(static_cast<int>(row[il]));
  }
  return cloud;
}

void write_ply_cloud(const std::filesystem::path& path, const PointCloud& cloud, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_header(out, binary);
  out << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.labeled()) out << "property int part_label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (binary) {
      put(out, p.x());
      put(out, p.y());
      put(out, p.z());
      if (cloud.labeled()) put(out, static_cast<std::int32_t>(cloud.labels[i]));
    } else {
      out.precision(17);
      out << p.x() << ' ' << p.y() << ' ' << p.z();
      if (cloud.labeled()) out << ' ' << cloud.labels[i];
      out << '\n';
    }
  }
}

TriangleMesh read_ply_mesh(const std::filesystem::path& path) {
  const PlyData data = read_ply(path);
  const Element* v = data.find("vertex");
  if (!v) throw Error(ErrorCode::SchemaError, path.string() + ": no vertex element");
  TriangleMesh mesh;
  mesh.vertices = vertex_positions(*v, path);
  if (const Element* f = data.find("face")) {
    for (const auto& poly : f->lists) {
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
        throw Error(ErrorCode::ReferenceError, path.string() + ": face index out of range");
    }
  }
  return mesh;
}

void write_ply_mesh(const std::filesystem::path& path, const TriangleMesh& mesh, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_header(out, binary);
  out << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  out.precision(17);
  for (const auto& p : mesh.vertices) {
    if (binary) {
      put(out, p.x());
      put(out, p.y());
      put(out, p.z());
    } else {
      out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
  }
  for (const auto& f : mesh.faces) {
    if (binary) {
      put(out, std::uint8_t{3});
      for (int idx : f) put(out, static_cast<std::int32_t>(idx));
    } else {
      out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
  }
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::SyntaxError, path.string() + ": bad vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ss >> token) {
        // v, v/vt, v//vn, v/vt/vn; negative indices are relative.
        int idx = std::stoi(token.substr(0, token.find('/')));
        idx = idx < 0 ? static_cast<int>(mesh.vertices.size()) + idx : idx - 1;
        poly.push_back(idx);
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
        throw Error(ErrorCode::ReferenceError, path.string() + ": face index out of range");
    }
  }
  return mesh;
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ") return read_obj(path);
  if (ext == ".ply" || ext == ".PLY") return read_ply_mesh(path);
  throw Error(ErrorCode::SchemaError, "unsupported mesh format " + ext);
}

}  // namespace affordfit
