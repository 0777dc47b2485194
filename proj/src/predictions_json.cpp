#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "segfuse/io.hpp"

namespace segfuse::io {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw IoError(IoError::Kind::Schema, where + ": " + what);
}

int read_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema_error(where, std::string("missing \"") + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) schema_error(where, std::string("\"") + key + "\" must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
    schema_error(where, std::string("\"") + key + "\" out of range");
  return static_cast<int>(n);
}

double read_score(const json& v, const char* key, const std::string& where) {
  if (!v.is_number()) schema_error(where, std::string("\"") + key + "\" must be a number");
  const double s = v.get<double>();
  if (!(s >= 0.0 && s <= 1.0)) schema_error(where, std::string("\"") + key + "\" outside [0,1]");
  return s;
}

PredictionRecord parse_record(const json& r, std::size_t index, const PredictionFile& file) {
  const std::string where = "instances[" + std::to_string(index) + "]";
  if (!r.is_object()) schema_error(where, "record must be an object");
  PredictionRecord p;

  const int id = read_int(r, "id", where);
  if (id < 1) schema_error(where, "\"id\" must be >= 1");
  p.id = static_cast<Label>(id);

  if (!r.contains("box") || !r.at("box").is_object()) schema_error(where, "missing \"box\" object");
  const json& b = r.at("box");
  p.box = {read_int(b, "x", where + ".box"), read_int(b, "y", where + ".box"), read_int(b, "w", where + ".box"),
           read_int(b, "h", where + ".box")};
  if (!p.box.valid()) schema_error(where, "box needs w >= 1 and h >= 1");
  if (file.canvas_width && file.canvas_height && !p.box.fits_in(*file.canvas_width, *file.canvas_height))
    schema_error(where, describe(p.box) + " lies outside the canvas");

  if (!r.contains("s_cls")) schema_error(where, "missing \"s_cls\"");
  p.s_cls = read_score(r.at("s_cls"), "s_cls", where);
  if (r.contains("s_qua") && !r.at("s_qua").is_null()) p.s_qua = read_score(r.at("s_qua"), "s_qua", where);

  if (!r.contains("mask_logits") || !r.at("mask_logits").is_array())
    schema_error(where, "missing \"mask_logits\" array");
  const json& m = r.at("mask_logits");
  constexpr std::size_t kCells = kRoiMaskSize * kRoiMaskSize;
  if (m.size() != kCells)
    schema_error(where, "mask_logits has " + std::to_string(m.size()) + " elements, expected " + std::to_string(kCells));
  std::vector<double> logits(kCells);
  for (std::size_t i = 0; i < kCells; ++i) {
    if (!m[i].is_number()) schema_error(where, "mask_logits[" + std::to_string(i) + "] is not a number");
    logits[i] = m[i].get<double>();
    if (!std::isfinite(logits[i])) schema_error(where, "mask_logits[" + std::to_string(i) + "] is not finite");
  }
  p.mask_logits = RealGrid(kRoiMaskSize, kRoiMaskSize, std::move(logits));
  return p;
}

}  // namespace

PredictionFile parse_predictions_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(IoError::Kind::Schema, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("document", "top level must be an object");

  PredictionFile file;
  if (doc.contains("canvas")) {
    const json& c = doc.at("canvas");
    if (!c.is_object()) schema_error("canvas", "must be an object");
    file.canvas_width = read_int(c, "width", "canvas");
    file.canvas_height = read_int(c, "height", "canvas");
    if (*file.canvas_width < 1 || *file.canvas_height < 1) schema_error("canvas", "dimensions must be >= 1");
  }
  if (!doc.contains("instances") || !doc.at("instances").is_array())
    schema_error("document", "missing \"instances\" array");
  const json& inst = doc.at("instances");
  file.instances.reserve(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) file.instances.push_back(parse_record(inst[i], i, file));
  return file;
}

PredictionFile read_predictions_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::NotFound, "cannot open predictions: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_predictions_json(ss.str());
  } catch (const IoError& e) {
    throw IoError(e.kind(), path.string() + ": " + e.what());
  }
}

std::string dump_predictions_json(const PredictionFile& file) {
  json doc = json::object();
  if (file.canvas_width && file.canvas_height)
    doc["canvas"] = {{"width", *file.canvas_width}, {"height", *file.canvas_height}};
  json inst = json::array();
  for (const auto& p : file.instances) {
    json r = {{"id", p.id},
              {"box", {{"x", p.box.x}, {"y", p.box.y}, {"w", p.box.w}, {"h", p.box.h}}},
              {"s_cls", p.s_cls}};
    if (p.s_qua) r["s_qua"] = *p.s_qua;
    auto v = p.mask_logits.values();
    r["mask_logits"] = std::vector<double>(v.begin(), v.end());
    inst.push_back(std::move(r));
  }
  doc["instances"] = std::move(inst);
  return doc.dump();
}

void write_predictions_json(const PredictionFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::Unwritable, "cannot create " + path.string());
  out << dump_predictions_json(file) << '\n';
  if (!out) throw IoError(IoError::Kind::Unwritable, "write failed: " + path.string());
}

}  // namespace segfuse::io
