#include "ufl/manifest.hpp"

#include <cctype>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "ufl/util.hpp"

namespace ufl {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path.string() : (base / path).string();
}

}  // namespace

BoundingBox parse_box(const std::string& text, char sep) {
  const std::vector<std::string> parts = split(text, sep);
  if (parts.size() != 4) {
    throw std::runtime_error("bounding box must have four fields: " + text);
  }
  BoundingBox box;
  try {
    box.x = std::stoi(trim(parts[0]));
    box.y = std::stoi(trim(parts[1]));
    box.w = std::stoi(trim(parts[2]));
    box.h = std::stoi(trim(parts[3]));
  } catch (const std::exception&) {
    throw std::runtime_error("bounding box fields must be integers: " + text);
  }
  if (box.w < 1 || box.h < 1) throw std::runtime_error("bounding box must be non-empty: " + text);
  return box;
}

PairManifest load_manifest(const std::string& path) {
  const std::string bytes = read_file(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  PairManifest manifest;
  std::istringstream in(bytes);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    std::vector<std::string> cols = split(line, ',');
    for (std::string& c : cols) c = trim(c);
    if (line_no == 1 && !cols.empty() && cols[0] == "test") continue;  // header
    if (cols.size() < 2 || cols.size() > 6) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected 2..6 columns");
    }
    cols.resize(6);

    PairEntry entry;
    entry.test = resolve(base, cols[0]);
    entry.exemplar = resolve(base, cols[1]);
    if (!cols[2].empty()) entry.test_labels = resolve(base, cols[2]);
    if (!cols[3].empty()) entry.exemplar_labels = resolve(base, cols[3]);
    if (!cols[4].empty()) entry.box_test = parse_box(cols[4], ':');
    if (!cols[5].empty()) entry.box_exemplar = parse_box(cols[5], ':');

    for (const std::string& f :
         {entry.test, entry.exemplar, entry.test_labels, entry.exemplar_labels}) {
      if (!f.empty() && !std::filesystem::exists(f)) {
        throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                 ": missing file " + f);
      }
    }
    manifest.pairs.push_back(std::move(entry));
  }
  if (manifest.pairs.empty()) throw std::runtime_error("manifest has no pairs: " + path);
  return manifest;
}

void save_manifest(const PairManifest& manifest, const std::string& path) {
  std::string out = "test,exemplar,test_labels,ex_labels,box_test,box_ex\n";
  auto box_text = [](const std::optional<BoundingBox>& box) {
    if (!box) return std::string();
    return std::to_string(box->x) + ":" + std::to_string(box->y) + ":" + std::to_string(box->w) +
           ":" + std::to_string(box->h);
  };
  for (const PairEntry& e : manifest.pairs) {
    out += e.test + "," + e.exemplar + "," + e.test_labels + "," + e.exemplar_labels + "," +
           box_text(e.box_test) + "," + box_text(e.box_exemplar) + "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace ufl
