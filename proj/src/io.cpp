#include "sfem/io.hpp"

#include <charconv>
#include <fstream>

#include "sfem/error.hpp"

namespace sfem {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

// Next token of an OFF stream, skipping '#' comments.
bool next_token(std::istream& in, std::string& token) {
  while (in >> token) {
    if (token[0] != '#') return true;
    std::string rest;
    std::getline(in, rest);
  }
  return false;
}

template <class T>
T parse_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  if (!next_token(in, token)) {
    throw Error(ErrorCode::kIo, "unexpected end of '" + path.string() + "'");
  }
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kIo, "malformed number '" + token + "' in '" + path.string() + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error(ErrorCode::kIo, "number formatting failed");
  return std::string(buffer, ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::string_view header) : out_(&out) {
  *out_ << header << '\n';
}

void CsvWriter::row(const std::vector<Field>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    if (const auto* d = std::get_if<double>(&fields[i])) {
      line += format_number(*d);
    } else if (const auto* n = std::get_if<std::int64_t>(&fields[i])) {
      char buffer[32];
      line.append(buffer, std::to_chars(buffer, buffer + sizeof buffer, *n).ptr);
    } else {
      line += std::get<std::string>(fields[i]);
    }
  }
  *out_ << line << '\n';
  out_->flush();
  if (!*out_) throw Error(ErrorCode::kIo, "CSV write failed");
}

SurfaceMesh read_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string magic;
  if (!next_token(in, magic) || magic != "OFF") {
    throw Error(ErrorCode::kIo, "'" + path.string() + "' is not an OFF file");
  }
  const auto num_vertices = parse_token<std::size_t>(in, path);
  const auto num_faces = parse_token<std::size_t>(in, path);
  parse_token<std::size_t>(in, path);  // edge count, unused

  std::vector<Vec3> nodes(num_vertices);
  for (Vec3& x : nodes) {
    for (int k = 0; k < 3; ++k) x[k] = parse_token<double>(in, path);
  }
  std::vector<Triangle> triangles(num_faces);
  for (Triangle& tri : triangles) {
    if (parse_token<int>(in, path) != 3) {
      throw Error(ErrorCode::kIo, "'" + path.string() + "' contains a non-triangular face");
    }
    for (NodeId& v : tri) {
      v = parse_token<NodeId>(in, path);
      if (v >= num_vertices) {
        throw Error(ErrorCode::kIo, "vertex index out of range in '" + path.string() + "'");
      }
    }
  }
  return SurfaceMesh(std::move(nodes), std::move(triangles));
}

void write_off(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ofstream out = open_for_writing(path);
  out << "OFF\n" << mesh.num_nodes() << ' ' << mesh.num_triangles() << " 0\n";
  for (const Vec3& x : mesh.nodes()) {
    out << format_number(x.x()) << ' ' << format_number(x.y()) << ' ' << format_number(x.z())
        << '\n';
  }
  for (const Triangle& t : mesh.triangles()) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  check_written(out, path);
}

void write_vtk(const std::filesystem::path& path, const SurfaceMesh& mesh, const FeFunction& u) {
  require_same_generation(mesh, u);
  std::ofstream out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\nsurface solution\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Vec3& x : mesh.nodes()) {
    out << format_number(x.x()) << ' ' << format_number(x.y()) << ' ' << format_number(x.z())
        << '\n';
  }
  out << "POLYGONS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const Triangle& t : mesh.triangles()) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : u.coefficients) out << format_number(v) << '\n';
  check_written(out, path);
}

}  // namespace sfem
