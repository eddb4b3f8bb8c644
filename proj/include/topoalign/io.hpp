#pragma once

// File formats.
//
// Binary point cloud ("TPCL"), all integers little-endian:
//   magic "TPCL" | version u16 | flags u16 | n u64 | d u32 | label_width u8 (=1)
//   | reserved u8 x3 | n label bytes | n*d f32 row-major | meta_len u32 | meta JSON
// The metadata blob carries the point ids under "ids".
//
// JSON-lines point cloud: one {"id", "label", "vec"} object per line.
// Both readers narrow coordinates to f32 and widen to f64, so the two
// encodings of a cloud load to identical in-memory clouds.
//
// Every double written by this module has at most 9 significant digits.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoalign/analysis.hpp"
#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/losses.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/scheduler.hpp"
#include "topoalign/topic_library.hpp"
#include "topoalign/topics.hpp"

namespace topoalign::io {

using json = nlohmann::ordered_json;

inline constexpr char kCloudMagic[4] = {'T', 'P', 'C', 'L'};
inline constexpr std::uint16_t kCloudVersion = 1;
inline constexpr std::size_t kCloudHeaderSize = 24;
inline constexpr const char* kLibraryFormatTag = "topoalign-topic-library";

enum class CloudFormat { Binary, JsonLines };

// ------------------------------------------------------------ file helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

inline json number(double v) { return json(round_sig9(v)); }

inline json vec_json(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

inline json matrix_json(const Matrix& m) {
  json arr = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) arr.push_back(vec_json(m.row(r)));
  return arr;
}

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, where + ": " + e.what());
  }
}

template <typename F>
auto with_record(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, where + ": " + e.what());
  }
}

inline Vec vec_from_json(const json& j, const std::string& field) {
  if (!j.contains(field) || !j.at(field).is_array())
    throw Error(ErrorKind::MalformedRecord, "missing array field '" + field + "'");
  Vec out;
  out.reserve(j.at(field).size());
  for (const auto& x : j.at(field)) {
    if (!x.is_number()) throw Error(ErrorKind::MalformedRecord, "non-numeric entry in '" + field + "'");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string id_from_json(const json& j) {
  if (!j.contains("id")) throw Error(ErrorKind::MalformedRecord, "missing field 'id'");
  const auto& id = j.at("id");
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<std::int64_t>());
  throw Error(ErrorKind::MalformedRecord, "field 'id' must be a string or integer");
}

// ------------------------------------------------------------ point clouds

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i));
  return value;
}

inline double narrow_to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace detail

inline std::string encode_cloud_binary(const LabeledPointCloud& cloud, const json& extra_metadata = json::object()) {
  std::string out(kCloudMagic, 4);
  detail::put_le<std::uint16_t>(out, kCloudVersion);
  detail::put_le<std::uint16_t>(out, 0);
  detail::put_le<std::uint64_t>(out, cloud.size());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cloud.dim()));
  detail::put_le<std::uint8_t>(out, 1);
  out.append(3, '\0');
  for (auto l : cloud.labels()) out.push_back(static_cast<char>(l));
  for (double v : cloud.points().data())
    detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  json meta = extra_metadata.is_object() ? extra_metadata : json::object();
  meta["ids"] = cloud.ids();
  const std::string blob = meta.dump();
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
  out += blob;
  return out;
}

inline LabeledPointCloud decode_cloud_binary(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCloudMagic, 4) != 0)
    throw Error(ErrorKind::BadMagic, "not a TPCL point cloud");
  if (bytes.size() < kCloudHeaderSize) throw Error(ErrorKind::TruncatedPayload, "header shorter than 24 bytes");
  const auto version = detail::get_le<std::uint16_t>(bytes, 4);
  if (version != kCloudVersion)
    throw Error(ErrorKind::MalformedRecord, "unsupported TPCL version " + std::to_string(version));
  const auto n = detail::get_le<std::uint64_t>(bytes, 8);
  const auto d = detail::get_le<std::uint32_t>(bytes, 16);
  const auto label_width = static_cast<std::uint8_t>(bytes[20]);
  if (label_width != 1) throw Error(ErrorKind::MalformedRecord, "label width must be 1");

  const std::uint64_t remaining = bytes.size() - kCloudHeaderSize;
  if (n > remaining || (d != 0 && n * d > remaining / 4))
    throw Error(ErrorKind::TruncatedPayload, "payload smaller than declared n*d");
  const std::size_t labels_at = kCloudHeaderSize;
  const std::size_t values_at = labels_at + n;
  const std::size_t meta_len_at = values_at + 4 * n * d;
  if (bytes.size() < meta_len_at + 4) throw Error(ErrorKind::TruncatedPayload, "payload smaller than declared n*d");
  const auto meta_len = detail::get_le<std::uint32_t>(bytes, meta_len_at);
  if (bytes.size() < meta_len_at + 4 + meta_len) throw Error(ErrorKind::TruncatedPayload, "metadata blob truncated");
  if (bytes.size() != meta_len_at + 4 + meta_len) throw Error(ErrorKind::MalformedRecord, "trailing bytes after metadata");

  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::uint8_t>(bytes[labels_at + i]);
    if (labels[i] > 1) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i));
  }
  Matrix points(n, d);
  for (std::size_t k = 0; k < n * d; ++k)
    points.data()[k] = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, values_at + 4 * k));

  std::vector<std::string> ids;
  if (meta_len > 0) {
    const json meta = parse_json(bytes.substr(meta_len_at + 4, meta_len), "metadata blob");
    if (meta.contains("ids")) {
      ids = with_record("metadata ids", [&] { return meta.at("ids").get<std::vector<std::string>>(); });
      if (ids.size() != n) throw Error(ErrorKind::MalformedRecord, "metadata ids length != n");
    }
  }
  if (ids.empty())
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return {std::move(points), std::move(labels), std::move(ids)};
}

inline std::string encode_cloud_jsonl(const LabeledPointCloud& cloud) {
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    json rec;
    rec["id"] = cloud.ids()[i];
    rec["label"] = cloud.labels()[i];
    const auto row = cloud.points().row(i);
    Vec v(row.begin(), row.end());
    for (double& x : v) x = detail::narrow_to_f32(x);
    rec["vec"] = vec_json(v);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline LabeledPointCloud decode_cloud_jsonl(const std::string& text) {
  std::vector<Vec> rows;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const json rec = parse_json(line, where);
    if (!rec.is_object()) throw Error(ErrorKind::MalformedRecord, where + ": expected an object");
    ids.push_back(id_from_json(rec));
    if (!rec.contains("label") || !rec.at("label").is_number_integer())
      throw Error(ErrorKind::MalformedRecord, where + ": missing integer 'label'");
    const auto label = rec.at("label").get<std::int64_t>();
    if (label < 0 || label > 1) throw Error(ErrorKind::LabelOutOfRange, where + ": label " + std::to_string(label));
    labels.push_back(static_cast<std::uint8_t>(label));
    Vec v = vec_from_json(rec, "vec");
    for (double& x : v) x = detail::narrow_to_f32(x);
    if (!rows.empty() && v.size() != rows.front().size())
      throw Error(ErrorKind::MalformedRecord, where + ": vector length differs from first record");
    rows.push_back(std::move(v));
  }
  Matrix points = rows.empty() ? Matrix() : Matrix::from_rows(rows);
  return {std::move(points), std::move(labels), std::move(ids)};
}

inline CloudFormat detect_cloud_format(const std::filesystem::path& path, const std::string& bytes) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl") return CloudFormat::JsonLines;
  if (ext == ".bin" || ext == ".tpcl") return CloudFormat::Binary;
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kCloudMagic, 4) == 0 ? CloudFormat::Binary
                                                                              : CloudFormat::JsonLines;
}

inline LabeledPointCloud read_point_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format = {}) {
  const std::string bytes = read_file(path);
  const CloudFormat f = format.value_or(detect_cloud_format(path, bytes));
  return f == CloudFormat::Binary ? decode_cloud_binary(bytes) : decode_cloud_jsonl(bytes);
}

inline void write_point_cloud(const std::filesystem::path& path, const LabeledPointCloud& cloud, CloudFormat format,
                              const json& metadata = json::object()) {
  write_file(path, format == CloudFormat::Binary ? encode_cloud_binary(cloud, metadata) : encode_cloud_jsonl(cloud));
}

// ------------------------------------------------------------ batches

inline std::string encode_trajectory_batch(const TrajectoryBatch& batch) {
  batch.validate();
  std::string out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json rec;
    rec["id"] = batch.ids[i];
    rec["h_prompt"] = vec_json(batch.h_prompt.row(i));
    rec["h_model"] = vec_json(batch.h_model.row(i));
    rec["h_gold"] = vec_json(batch.h_gold.row(i));
    out += rec.dump() + "\n";
  }
  return out;
}

inline TrajectoryBatch decode_trajectory_batch(const std::string& text) {
  TrajectoryBatch batch;
  std::vector<Vec> prompt, model, gold;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    const std::string where = "line " + std::to_string(++line_no);
    const json rec = parse_json(line, where);
    batch.ids.push_back(id_from_json(rec));
    prompt.push_back(vec_from_json(rec, "h_prompt"));
    model.push_back(vec_from_json(rec, "h_model"));
    gold.push_back(vec_from_json(rec, "h_gold"));
  }
  try {
    batch.h_prompt = Matrix::from_rows(prompt);
    batch.h_model = Matrix::from_rows(model);
    batch.h_gold = Matrix::from_rows(gold);
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
  batch.validate();
  return batch;
}

inline std::string encode_preference_batch(const PreferenceBatch& batch) {
  batch.validate();
  std::string out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json rec;
    rec["id"] = batch.ids[i];
    rec["topic_id"] = batch.topic_ids[i];
    rec["h_chosen"] = vec_json(batch.h_chosen.row(i));
    rec["h_rejected"] = vec_json(batch.h_rejected.row(i));
    out += rec.dump() + "\n";
  }
  return out;
}

inline PreferenceBatch decode_preference_batch(const std::string& text) {
  PreferenceBatch batch;
  std::vector<Vec> chosen, rejected;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    const std::string where = "line " + std::to_string(++line_no);
    const json rec = parse_json(line, where);
    batch.ids.push_back(id_from_json(rec));
    if (!rec.contains("topic_id") || !rec.at("topic_id").is_number_integer())
      throw Error(ErrorKind::MalformedRecord, where + ": missing integer 'topic_id'");
    batch.topic_ids.push_back(rec.at("topic_id").get<TopicId>());
    chosen.push_back(vec_from_json(rec, "h_chosen"));
    rejected.push_back(vec_from_json(rec, "h_rejected"));
  }
  try {
    batch.h_chosen = Matrix::from_rows(chosen);
    batch.h_rejected = Matrix::from_rows(rejected);
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
  batch.validate();
  return batch;
}

// ------------------------------------------------------------ projection

inline std::string encode_projection(const Projection& p) {
  json j;
  j["rows"] = p.rows();
  j["cols"] = p.cols();
  j["seed"] = p.seed;
  j["values"] = matrix_json(p.values);
  return j.dump(2) + "\n";
}

inline Projection decode_projection(const std::string& text) {
  const json j = parse_json(text, "projection");
  return with_record("projection", [&] {
    Projection p;
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    p.seed = j.value("seed", std::uint64_t{0});
    std::vector<Vec> values;
    for (const auto& row : j.at("values")) values.push_back(row.get<Vec>());
    p.values = values.empty() ? Matrix(rows, cols) : Matrix::from_rows(values);
    if (p.values.rows() != rows || p.values.cols() != cols)
      throw Error(ErrorKind::MalformedRecord, "projection values do not match declared shape");
    for (double v : p.values.data())
      if (!std::isfinite(v)) throw Error(ErrorKind::MalformedRecord, "non-finite projection entry");
    return p;
  });
}

// ------------------------------------------------------------ topic library

inline std::string encode_library(const TopicLibrary& lib) {
  json header;
  header["format"] = kLibraryFormatTag;
  header["version"] = TopicLibrary::kFormatVersion;
  header["K"] = lib.topics.size();
  header["dim_s"] = lib.dim_s;
  header["other_topic_id"] = lib.other_topic_id ? json(*lib.other_topic_id) : json(nullptr);
  json meta = json::object();
  for (const auto& [k, v] : lib.metadata) meta[k] = v;
  header["metadata"] = meta;
  header["warnings"] = lib.warnings;
  std::string out = header.dump() + "\n";
  for (const auto& t : lib.topics) {
    json rec;
    rec["topic_id"] = t.id;
    rec["name"] = t.name;
    rec["member_count"] = t.member_count;
    rec["centroid"] = vec_json(t.centroid);
    rec["u"] = vec_json(t.u);
    if (!t.absorbed_centroids.empty()) {
      json absorbed = json::array();
      for (const auto& c : t.absorbed_centroids) absorbed.push_back(vec_json(c));
      rec["absorbed_centroids"] = absorbed;
    }
    out += rec.dump() + "\n";
  }
  return out;
}

inline TopicLibrary decode_library(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorKind::MalformedRecord, "empty topic library file");
  const json header = parse_json(lines.front(), "library header");
  TopicLibrary lib;
  std::size_t declared_k = 0;
  with_record("library header", [&] {
    if (header.at("format").get<std::string>() != kLibraryFormatTag)
      throw Error(ErrorKind::BadMagic, "not a topic library file");
    if (header.at("version").get<int>() != TopicLibrary::kFormatVersion)
      throw Error(ErrorKind::MalformedRecord, "unsupported library version");
    declared_k = header.at("K").get<std::size_t>();
    lib.dim_s = header.at("dim_s").get<std::size_t>();
    if (!header.at("other_topic_id").is_null()) lib.other_topic_id = header.at("other_topic_id").get<TopicId>();
    for (const auto& [k, v] : header.at("metadata").items()) lib.metadata[k] = v.get<std::string>();
    lib.warnings = header.at("warnings").get<std::vector<std::string>>();
  });
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = "library line " + std::to_string(i + 1);
    const json rec = parse_json(lines[i], where);
    Topic t = with_record(where, [&] {
      Topic topic;
      topic.id = rec.at("topic_id").get<TopicId>();
      topic.name = rec.at("name").get<std::string>();
      topic.member_count = rec.at("member_count").get<std::int64_t>();
      topic.centroid = vec_from_json(rec, "centroid");
      topic.u = vec_from_json(rec, "u");
      if (rec.contains("absorbed_centroids"))
        for (const auto& c : rec.at("absorbed_centroids")) topic.absorbed_centroids.push_back(c.get<Vec>());
      return topic;
    });
    if (t.u.size() != lib.dim_s || t.centroid.size() != lib.dim_s)
      throw Error(ErrorKind::MalformedRecord, where + ": vector dim != dim_s");
    lib.topics.push_back(std::move(t));
  }
  if (lib.topics.size() != declared_k) throw Error(ErrorKind::MalformedRecord, "topic count differs from header K");
  for (std::size_t i = 1; i < lib.topics.size(); ++i)
    if (lib.topics[i].id <= lib.topics[i - 1].id)
      throw Error(ErrorKind::MalformedRecord, "topic ids must be unique and ascending");
  return lib;
}

inline TopicLibrary read_library(const std::filesystem::path& path) { return decode_library(read_file(path)); }
inline void write_library(const std::filesystem::path& path, const TopicLibrary& lib) {
  write_file(path, encode_library(lib));
}

// ------------------------------------------------------------ templates

inline std::vector<TemplatePair> decode_templates(const std::string& text) {
  const json j = parse_json(text, "templates");
  std::vector<TemplatePair> out;
  with_record("templates", [&] {
    for (const auto& t : j.at("templates")) out.push_back({t.at("positive").get<std::string>(), t.at("negative").get<std::string>()});
  });
  for (const auto& t : out) t.validate();
  if (out.empty()) throw Error(ErrorKind::EmptyTemplateSet, "template file has no pairs");
  return out;
}

inline std::string encode_templates(const std::vector<TemplatePair>& templates) {
  json arr = json::array();
  for (const auto& t : templates) arr.push_back({{"positive", t.positive}, {"negative", t.negative}});
  json j;
  j["templates"] = arr;
  return j.dump(2) + "\n";
}

// Sentences to be encoded externally: one record per (topic, pair).
inline std::string encode_template_sentences(const TopicLibrary& lib, const std::vector<TemplatePair>& templates) {
  std::string out;
  for (const auto& topic : lib.topics) {
    for (std::size_t k = 0; k < templates.size(); ++k) {
      const auto [pos, neg] = templates[k].instantiate(topic.name);
      json rec;
      rec["topic_id"] = topic.id;
      rec["pair"] = k;
      rec["positive"] = pos;
      rec["negative"] = neg;
      out += rec.dump() + "\n";
    }
  }
  return out;
}

// Externally encoded templates: {"topic_id", "pair", "e_pos", "e_neg"} per line.
inline std::map<TopicId, std::vector<EmbeddedTemplate>> decode_embedded_templates(const std::string& text) {
  std::map<TopicId, std::vector<EmbeddedTemplate>> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    const std::string where = "line " + std::to_string(++line_no);
    const json rec = parse_json(line, where);
    const auto topic = with_record(where, [&] { return rec.at("topic_id").get<TopicId>(); });
    out[topic].push_back({vec_from_json(rec, "e_pos"), vec_from_json(rec, "e_neg")});
  }
  return out;
}

inline std::map<TopicId, std::string> decode_name_map(const std::string& text) {
  const json j = parse_json(text, "name map");
  std::map<TopicId, std::string> out;
  with_record("name map", [&] {
    for (const auto& [k, v] : j.items()) {
      TopicId id = 0;
      const auto [end, ec] = std::from_chars(k.data(), k.data() + k.size(), id);
      if (ec != std::errc() || end != k.data() + k.size()) throw Error(ErrorKind::MalformedRecord, "name map key '" + k + "' is not an integer");
      out[id] = v.get<std::string>();
    }
  });
  return out;
}

// {"id", "text"} per line.
inline std::map<std::string, std::string> decode_prompt_texts(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    const std::string where = "line " + std::to_string(++line_no);
    const json rec = parse_json(line, where);
    out[id_from_json(rec)] = with_record(where, [&] { return rec.at("text").get<std::string>(); });
  }
  return out;
}

// ------------------------------------------------------------ delimited text

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ' ') {
      if (!cur.empty()) fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) fields.push_back(cur);
  return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

// step,dpo,tpo per line; a non-numeric first line is treated as a header.
inline std::vector<LossSample> decode_loss_trace(const std::string& text) {
  std::vector<LossSample> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    const bool numeric = f.size() == 3 && parse_double(f[0]) && parse_double(f[1]) && parse_double(f[2]);
    if (!numeric) {
      if (i == 0) continue;
      throw Error(ErrorKind::MalformedRecord, "loss trace line " + std::to_string(i + 1) + ": expected step,dpo,tpo");
    }
    out.push_back({static_cast<std::int64_t>(*parse_double(f[0])), *parse_double(f[1]), *parse_double(f[2])});
  }
  return out;
}

inline std::string encode_lambda_trace(const std::vector<LossSample>& trace, const std::vector<SchedulerState>& states) {
  std::string out = "step,ema_dpo,ema_tpo,lambda_dyn\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    out += std::to_string(trace[i].step) + "," + format_sig9(states[i].ema_dpo) + "," + format_sig9(states[i].ema_tpo) +
           "," + format_sig9(states[i].lambda_dyn) + "\n";
  }
  return out;
}

// id,rm,help per line; optional header.
inline ScoreTable decode_scores(const std::string& text) {
  ScoreTable out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 3) throw Error(ErrorKind::MalformedRecord, "score line " + std::to_string(i + 1) + ": expected id,rm,help");
    const auto rm = parse_double(f[1]);
    const auto help = parse_double(f[2]);
    if (!rm || !help) {
      if (i == 0) continue;
      throw Error(ErrorKind::MalformedRecord, "score line " + std::to_string(i + 1) + ": non-numeric score");
    }
    out[f[0]] = {*rm, *help};
  }
  return out;
}

// ------------------------------------------------------------ outputs

inline std::string encode_bridges(const LabeledPointCloud& cloud, const std::vector<Bridge>& bridges) {
  std::string out;
  for (const auto& b : bridges) {
    json rec;
    rec["source"] = cloud.ids()[b.source];
    rec["target"] = cloud.ids()[b.target];
    rec["source_index"] = b.source;
    rec["target_index"] = b.target;
    rec["weight"] = number(b.weight);
    rec["direction"] = vec_json(b.direction);
    out += rec.dump() + "\n";
  }
  return out;
}

inline json loss_result_json(const LossResult& r) {
  json j;
  j["loss"] = number(r.value);
  j["bridge_count"] = r.bridge_count;
  json items = json::array();
  for (const auto& it : r.per_item) items.push_back({{"id", it.id}, {"cosine", number(it.cosine)}});
  j["per_item"] = items;
  if (!r.grads.empty()) {
    json g = json::object();
    for (const auto& [name, m] : r.grads) g[name] = matrix_json(m);
    j["grads"] = g;
  }
  return j;
}

inline json histogram_json(const Histogram& h) {
  json j;
  j["lo"] = number(h.lo);
  j["hi"] = number(h.hi);
  j["counts"] = h.counts;
  return j;
}

inline json length_stats_json(const LengthStats& s) {
  json j;
  j["count"] = s.count;
  j["mean_length"] = number(s.mean_length);
  j["min"] = number(s.quantiles.min);
  j["p25"] = number(s.quantiles.p25);
  j["median"] = number(s.quantiles.median);
  j["p75"] = number(s.quantiles.p75);
  j["max"] = number(s.quantiles.max);
  return j;
}

inline json topic_rows_json(const std::vector<TopicGainRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["topic_id"] = r.topic_id;
    j["n"] = r.n;
    j["mean_sigma"] = number(r.mean_sigma);
    j["delta_rm"] = number(r.delta_rm);
    j["delta_help"] = number(r.delta_help);
    arr.push_back(j);
  }
  return arr;
}

// ------------------------------------------------------------ run config

struct RunConfig {
  double lambda_topo = kDefaultLambdaTopo;
  SchedulerConfig scheduler;
  double ln_eps = kDefaultLayerNormEps;
  double cosine_eps = kDefaultCosineEps;
  std::optional<std::uint64_t> seed;
  std::string layer_tag = "-4";
  CloudFormat format = CloudFormat::Binary;
};

inline RunConfig decode_run_config(const std::string& text) {
  const json j = parse_json(text, "config");
  RunConfig c;
  with_record("config", [&] {
    c.lambda_topo = j.value("lambda_topo", c.lambda_topo);
    c.ln_eps = j.value("ln_eps", c.ln_eps);
    c.cosine_eps = j.value("cosine_eps", c.cosine_eps);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.layer_tag = j.value("layer_tag", c.layer_tag);
    const std::string fmt = j.value("format", std::string("bin"));
    if (fmt == "bin") c.format = CloudFormat::Binary;
    else if (fmt == "jsonl") c.format = CloudFormat::JsonLines;
    else throw Error(ErrorKind::InvalidArgument, "config format must be bin or jsonl");
    if (j.contains("scheduler")) {
      const auto& s = j.at("scheduler");
      c.scheduler.gamma = s.value("gamma", c.scheduler.gamma);
      c.scheduler.alpha = s.value("alpha", c.scheduler.alpha);
      c.scheduler.eps = s.value("eps", c.scheduler.eps);
      c.scheduler.warmup_steps = s.value("warmup_steps", c.scheduler.warmup_steps);
    }
  });
  if (c.lambda_topo < 0) throw Error(ErrorKind::InvalidArgument, "lambda_topo must be non-negative");
  c.scheduler.validate();
  return c;
}

}  // namespace topoalign::io
