#include <cstdio>
#include <fstream>
#include <sstream>

#include "segfuse/io.hpp"

namespace segfuse::io {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed6(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string md_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

struct Row {
  std::string id;
  std::vector<std::string> cells;
};

std::vector<Row> build_rows(std::span<const ImageReport> images, const AggregateMetrics& agg) {
  std::vector<Row> rows;
  for (const auto& im : images) {
    const auto& m = im.metrics;
    rows.push_back({im.image_id,
                    {fixed6(m.aji), fixed6(m.dice), fixed6(m.f1), fixed6(m.pq.pq), fixed6(m.pq.dq), fixed6(m.pq.sq),
                     fixed6(m.sbd)}});
  }
  auto summary_row = [&](const char* name, auto pick) {
    std::optional<double> sbd;
    if (agg.sbd) sbd = pick(*agg.sbd);
    rows.push_back({name,
                    {fixed6(pick(agg.aji)), fixed6(pick(agg.dice)), fixed6(pick(agg.f1)), fixed6(pick(agg.pq)),
                     fixed6(pick(agg.dq)), fixed6(pick(agg.sq)), fixed6(sbd)}});
  };
  summary_row("mean", [](const MetricSummary& s) { return s.mean; });
  summary_row("std", [](const MetricSummary& s) { return s.std; });
  return rows;
}

constexpr const char* kColumns[] = {"image_id", "aji", "dice", "f1", "pq", "dq", "sq", "sbd"};

}  // namespace

std::string format_report(std::span<const ImageReport> images, const AggregateMetrics& agg, ReportFormat format,
                          int sbd_skipped) {
  if (images.empty()) throw InvalidArgument("format_report: no images");
  const auto rows = build_rows(images, agg);
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
      out << csv_field(r.id);
      for (const auto& c : r.cells) out << ',' << c;
      out << '\n';
    }
    if (sbd_skipped > 0) out << "# sbd skipped for " << sbd_skipped << " image(s) with an empty map\n";
  } else {
    out << '|';
    for (const char* c : kColumns) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "---:|" : "---|");
    out << '\n';
    for (const auto& r : rows) {
      out << "| " << md_field(r.id) << " |";
      for (const auto& c : r.cells) out << ' ' << c << " |";
      out << '\n';
    }
    if (sbd_skipped > 0) out << "\nSBD skipped for " << sbd_skipped << " image(s) with an empty map.\n";
  }
  return out.str();
}

void write_report(std::span<const ImageReport> images, const AggregateMetrics& agg, const std::filesystem::path& path,
                  ReportFormat format, int sbd_skipped) {
  const std::string text = format_report(images, agg, format, sbd_skipped);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::Unwritable, "cannot create report " + path.string());
  out << text;
  if (!out) throw IoError(IoError::Kind::Unwritable, "write failed: " + path.string());
}

}  // namespace segfuse::io
