#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace qdmag::cli {

/// 12 significant digits, '.' decimal point, independent of the locale.
std::string fmt(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string text() const;
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable read_csv(const std::filesystem::path& path);

/// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_hash(const std::string& content);

/// Writes `name` under `dir` and returns its content hash.
std::string write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content);

struct RunRecord {
  std::string command;
  const RunConfig* config = nullptr;
  unsigned threads = 1;
  std::vector<std::pair<std::string, std::string>> outputs;  ///< file name, content hash
  std::vector<std::string> warnings;
};

/// <command>.json next to the CSV files: resolved config, input hash, output
/// hashes and a timestamp (the only nondeterministic field of a run).
void write_sidecar(const std::filesystem::path& dir, const RunRecord& record);

}  // namespace qdmag::cli
