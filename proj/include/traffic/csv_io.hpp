#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace traffic {

using Json = nlohmann::ordered_json;

/// Doubles are serialized with 17 significant digits so that parsing the
/// text recovers the exact bit pattern.
std::string format_double(double x);

/// An in-memory CSV table with a fixed column order.
class Table {
 public:
  Table(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  std::size_t row_count() const { return rows_.size(); }

  /// Cells must already be formatted; the count must match the header.
  void add_row(std::vector<std::string> cells);

  /// Header line plus one line per row, '\n' separated, trailing newline.
  std::string to_csv() const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// A non-CSV artifact (SVG chart, JSON report) written next to the tables.
struct NamedBlob {
  std::string name;
  std::string bytes;
};

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

/// Writes every table and blob into output_dir, then a manifest.json with
/// the run config, master seed, version and per-file SHA-256 digests.
/// Identical inputs produce byte-identical files. Returns the manifest.
Json write_results(const std::filesystem::path& output_dir,
                   const Json& config, std::uint64_t seed,
                   const std::vector<Table>& tables,
                   const std::vector<NamedBlob>& blobs = {});

}  // namespace traffic
