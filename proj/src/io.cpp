#include "thermal/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace thermal {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t config_hash(const nlohmann::json& config) {
  const std::string canon = config.dump();  // nlohmann keeps object keys sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OutputFile::OutputFile(std::filesystem::path path)
    : final_path_(std::move(path)), partial_path_(final_path_.string() + ".partial") {
  if (final_path_.has_parent_path()) std::filesystem::create_directories(final_path_.parent_path());
  out_ = std::make_unique<std::ofstream>(partial_path_, std::ios::binary);
  if (!*out_) throw std::runtime_error("cannot open " + partial_path_.string());
}

OutputFile::~OutputFile() {
  if (!committed_ && out_) out_->close();
}

std::ostream& OutputFile::stream() { return *out_; }

void OutputFile::commit() {
  out_->close();
  if (!*out_) throw std::runtime_error("write failed for " + partial_path_.string());
  std::filesystem::rename(partial_path_, final_path_);
  committed_ = true;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns, std::uint64_t hash) {
  if (header.size() != columns.size()) throw std::invalid_argument("csv header/column mismatch");
  OutputFile file(path);
  auto& os = file.stream();
  os << "# config_hash=" << hash_hex(hash) << " version=" << kVersion << "\n";
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows) throw std::invalid_argument("csv columns must have equal length");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      os << (c ? "," : "") << format_double(columns[c][r]);
    os << "\n";
  }
  file.commit();
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  OutputFile file(path);
  file.stream() << j.dump(2) << "\n";
  file.commit();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

namespace {
constexpr char kBankMagic[8] = {'T', 'S', 'P', 'B', 'A', 'N', 'K', '\0'};
constexpr std::uint32_t kBankVersion = 1;
}  // namespace

void write_bank(const std::filesystem::path& path, const Matrix& data, std::uint64_t hash) {
  OutputFile file(path);
  auto& os = file.stream();
  os.write(kBankMagic, 8);
  const std::uint32_t version = kBankVersion;
  const std::uint64_t rows = data.rows(), cols = data.cols();
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&hash), sizeof hash);
  os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double v = data(r, c);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  file.commit();
}

Bank read_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kBankMagic, 8) != 0) throw std::runtime_error("not a sample bank: " + path.string());
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  Bank bank;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&bank.hash), sizeof bank.hash);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (version != kBankVersion) throw std::runtime_error("unsupported bank version");
  bank.data.resize(rows, cols);
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      bank.data(r, c) = v;
    }
  if (!in) throw std::runtime_error("truncated sample bank: " + path.string());
  return bank;
}

namespace {

const char* kPalette[10] = {"#4363d8", "#e6194b", "#3cb44b", "#f58231", "#911eb4",
                            "#46f0f0", "#f032e6", "#808000", "#000075", "#9a6324"};

}  // namespace

void write_svg_lines(const std::filesystem::path& path, const Vector& x,
                     const std::vector<Vector>& series, const std::vector<std::string>& labels) {
  const int width = 900, height = 560, margin = 50;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : series) {
    ymin = std::min(ymin, s.minCoeff());
    ymax = std::max(ymax, s.maxCoeff());
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double xmin = x.minCoeff(), xmax = x.maxCoeff();
  auto px = [&](double v) { return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double v) { return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin); };

  OutputFile file(path);
  auto& os = file.stream();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\""
     << py(0) << "\" stroke=\"#bbbbbb\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << px(x[i]) << "," << py(series[s][i]) << " ";
    os << "\"/>\n";
    if (s < labels.size())
      os << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16 * s << "\" font-size=\"12\" fill=\""
         << kPalette[s % 10] << "\">" << labels[s] << "</text>\n";
  }
  os << "</svg>\n";
  file.commit();
}

void write_svg_heatmap(const std::filesystem::path& path, const Matrix& values) {
  const int cell = 24, margin = 40;
  const int width = margin * 2 + cell * static_cast<int>(values.cols());
  const int height = margin * 2 + cell * static_cast<int>(values.rows());
  const double vmax = std::max(1e-300, values.cwiseAbs().maxCoeff());

  OutputFile file(path);
  auto& os = file.stream();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double t = std::abs(values(r, c)) / vmax;
      const int red = static_cast<int>(255 * t);
      const int blue = static_cast<int>(255 * (1.0 - t));
      os << "<rect x=\"" << margin + c * cell << "\" y=\"" << margin + r * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ",64," << blue << ")\"/>\n";
    }
  }
  os << "</svg>\n";
  file.commit();
}

}  // namespace thermal
