#include "dtninv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw IoError("malformed number '" + s + "' in " + path.string());
  }
  return v;
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history,
                       bool with_seconds) {
  std::ostringstream os;
  os << "epoch,mean_loss,rel_error,lr,clamps,seconds\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << format_double(r.mean_loss) << ',' << format_double(r.rel_error) << ','
       << format_double(r.lr) << ',' << r.clamps << ',' << (with_seconds ? format_double(r.seconds) : "0") << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line) || line != "epoch,mean_loss,rel_error,lr,clamps,seconds") {
    throw IoError("unexpected history header in " + path.string());
  }
  std::vector<EpochRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw IoError("malformed history row in " + path.string());
    EpochRecord r;
    r.epoch = static_cast<int>(to_double(f[0], path));
    r.mean_loss = to_double(f[1], path);
    r.rel_error = to_double(f[2], path);
    r.lr = to_double(f[3], path);
    r.clamps = static_cast<long>(to_double(f[4], path));
    r.seconds = to_double(f[5], path);
    out.push_back(r);
  }
  return out;
}

void write_field_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& k_exact,
                     const Vector& k_recon) {
  require(k_exact.size() == k_recon.size() && static_cast<std::size_t>(k_exact.size()) == mesh.num_vertices(),
          "field dump sizes do not match the mesh");
  std::ostringstream os;
  os << "x,y,k_exact,k_recon,abs_err\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point p = mesh.vertex(static_cast<Index>(v));
    const auto i = static_cast<Eigen::Index>(v);
    os << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(k_exact[i]) << ','
       << format_double(k_recon[i]) << ',' << format_double(std::abs(k_exact[i] - k_recon[i])) << '\n';
  }
  write_text_file(path, os.str());
}

FieldTable read_field_csv(const std::filesystem::path& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line) || line != "x,y,k_exact,k_recon,abs_err") {
    throw IoError("unexpected field header in " + path.string());
  }
  std::vector<Point> pts;
  std::vector<double> ex, rc;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw IoError("malformed field row in " + path.string());
    pts.push_back({to_double(f[0], path), to_double(f[1], path)});
    ex.push_back(to_double(f[2], path));
    rc.push_back(to_double(f[3], path));
  }
  FieldTable t;
  t.points = std::move(pts);
  t.k_exact = Eigen::Map<const Vector>(ex.data(), static_cast<Eigen::Index>(ex.size()));
  t.k_recon = Eigen::Map<const Vector>(rc.data(), static_cast<Eigen::Index>(rc.size()));
  return t;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

} // namespace dtninv
