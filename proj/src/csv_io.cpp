#include "traffic/csv_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "traffic/version.hpp"

namespace traffic {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Table::Table(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    std::ostringstream os;
    os << "table " << name_ << ": row has " << cells.size()
       << " cells, header has " << columns_.size();
    throw std::invalid_argument(os.str());
  }
  rows_.push_back(std::move(cells));
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) os << ',';
    os << columns_[i];
  }
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

}  // namespace

Json write_results(const std::filesystem::path& output_dir, const Json& config,
                   std::uint64_t seed, const std::vector<Table>& tables,
                   const std::vector<NamedBlob>& blobs) {
  std::filesystem::create_directories(output_dir);

  Json files = Json::array();
  auto record = [&](const std::string& name, const std::string& bytes,
                    std::size_t rows) {
    write_file(output_dir / name, bytes);
    Json entry;
    entry["name"] = name;
    entry["sha256"] = sha256_hex(bytes);
    entry["rows"] = rows;
    files.push_back(entry);
  };

  for (const Table& t : tables) {
    record(t.name() + ".csv", t.to_csv(), t.row_count());
  }
  for (const NamedBlob& b : blobs) {
    record(b.name, b.bytes, 0);
  }

  Json manifest;
  manifest["config"] = config;
  manifest["seed"] = seed;
  manifest["version"] = kVersion;
  manifest["files"] = files;
  write_file(output_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace traffic
