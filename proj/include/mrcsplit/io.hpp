#pragma once

// Line-delimited record files. Files written by the toolkit start with a
// single {"provenance": {...}} line; readers accept files with or without it.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrcsplit/error.hpp"

namespace mrcsplit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct JsonlRecord {
  std::size_t line = 0;  // 1-based
  json value;
};

struct JsonlFile {
  std::optional<json> provenance;
  std::vector<JsonlRecord> records;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool is_provenance_line(const json& j) {
  return j.is_object() && j.size() == 1 && j.contains("provenance");
}

inline JsonlFile parse_jsonl(const std::string& text, const std::string& name) {
  JsonlFile file;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::MalformedFile,
                  name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (file.records.empty() && !file.provenance && is_provenance_line(value)) {
      file.provenance = value["provenance"];
      continue;
    }
    file.records.push_back({line_no, std::move(value)});
  }
  return file;
}

inline JsonlFile read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_file(path), path.string());
}

inline std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
}

inline std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
}

class JsonlWriter {
 public:
  JsonlWriter(const std::filesystem::path& path, const json& provenance) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
    if (!provenance.is_null()) out_ << dump_line(json{{"provenance", provenance}});
  }

  template <typename J>
  void write(const J& record) {
    out_ << dump_line(record);
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorKind::Io, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace mrcsplit
