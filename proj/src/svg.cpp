#include "mppi/svg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mppi {

namespace {

[[noreturn]] void csv_error(const std::string& path, int line, const std::string& msg) {
  std::ostringstream os;
  os << path << ": line " << line << ": " << msg;
  throw std::invalid_argument(os.str());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_real(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) csv_error(path, line, "trailing characters in number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    csv_error(path, line, "expected a number, got '" + s + "'");
  } catch (const std::out_of_range&) {
    csv_error(path, line, "number out of range: '" + s + "'");
  }
}

std::string fmt(double v, int decimals = 1) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string safe_filename(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_')
               ? c
               : '-';
  }
  return out.empty() ? std::string("task") : out;
}

}  // namespace

std::vector<CellSummary> read_summary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::invalid_argument(path + ": cannot open summary CSV");
  }
  std::vector<CellSummary> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kSummaryCsvHeader) {
        csv_error(path, line_no,
                  std::string("expected header '") + kSummaryCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      csv_error(path, line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    CellSummary c;
    c.task = fields[0];
    c.method = fields[1];
    c.success_pct = parse_real(fields[2], path, line_no);
    c.steps_mean = parse_real(fields[3], path, line_no);
    c.steps_std = parse_real(fields[4], path, line_no);
    c.time_mean_ms = parse_real(fields[5], path, line_no);
    c.time_std_ms = parse_real(fields[6], path, line_no);
    rows.push_back(std::move(c));
  }
  if (!header_seen) {
    csv_error(path, line_no, "missing header");
  }
  if (rows.empty()) {
    csv_error(path, line_no, "no data rows");
  }
  return rows;
}

std::string render_task_chart(const std::string& task,
                              const std::vector<CellSummary>& rows) {
  if (rows.empty()) {
    throw std::invalid_argument("no rows to plot for task '" + task + "'");
  }
  const int width = 640;
  const int height = 400;
  const int margin_left = 70;
  const int margin_right = 20;
  const int margin_top = 50;
  const int margin_bottom = 70;
  const int plot_w = width - margin_left - margin_right;
  const int plot_h = height - margin_top - margin_bottom;

  double max_steps = 0.0;
  for (const auto& r : rows) max_steps = std::max(max_steps, r.steps_mean);
  if (max_steps <= 0.0) max_steps = 1.0;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
        "font-size=\"16\" text-anchor=\"middle\">"
     << xml_escape(task) << ": steps to goal (bar) and success rate</text>\n";

  // horizontal gridlines with y-axis tick labels
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double frac = static_cast<double>(i) / ticks;
    const double y = margin_top + plot_h - frac * plot_h;
    os << "<line x1=\"" << margin_left << "\" y1=\"" << fmt(y, 1) << "\" x2=\""
       << margin_left + plot_w << "\" y2=\"" << fmt(y, 1)
       << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << margin_left - 8 << "\" y=\"" << fmt(y + 4, 1)
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
       << fmt(frac * max_steps, 0) << "</text>\n";
  }
  os << "<text x=\"18\" y=\"" << margin_top + plot_h / 2
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 18 "
     << margin_top + plot_h / 2 << ")\">steps to goal</text>\n";

  const int n = static_cast<int>(rows.size());
  const double slot = static_cast<double>(plot_w) / n;
  const double bar_w = slot * 0.6;
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const double x = margin_left + i * slot + (slot - bar_w) / 2.0;
    const double h = plot_h * (r.steps_mean / max_steps);
    const double y = margin_top + plot_h - h;
    os << "<rect x=\"" << fmt(x, 1) << "\" y=\"" << fmt(y, 1) << "\" width=\""
       << fmt(bar_w, 1) << "\" height=\"" << fmt(h, 1)
       << "\" fill=\"#4878a8\" stroke=\"#2f4f6f\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fmt(x + bar_w / 2.0, 1) << "\" y=\"" << fmt(y - 6, 1)
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
       << fmt(r.success_pct, 0) << "%</text>\n";
    os << "<text x=\"" << fmt(x + bar_w / 2.0, 1) << "\" y=\"" << margin_top + plot_h + 16
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" "
          "transform=\"rotate(20 "
       << fmt(x + bar_w / 2.0, 1) << " " << margin_top + plot_h + 16 << ")\">"
       << xml_escape(r.method) << "</text>\n";
  }
  os << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h << "\" x2=\""
     << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\""
     << margin_left << "\" y2=\"" << margin_top + plot_h
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">labels "
        "above bars: trial success rate</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> write_summary_charts(const std::vector<CellSummary>& summaries,
                                              const std::string& out_dir) {
  if (summaries.empty()) {
    throw std::invalid_argument("no summary rows to plot");
  }
  std::filesystem::create_directories(out_dir);
  // group rows by task, preserving first-appearance order
  std::vector<std::string> tasks;
  for (const auto& s : summaries) {
    if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) {
      tasks.push_back(s.task);
    }
  }
  std::vector<std::string> written;
  for (const auto& task : tasks) {
    std::vector<CellSummary> rows;
    for (const auto& s : summaries) {
      if (s.task == task) rows.push_back(s);
    }
    const std::string path =
        (std::filesystem::path(out_dir) / (safe_filename(task) + ".svg")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) {
      throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    os << render_task_chart(task, rows);
    if (!os) {
      throw std::runtime_error("write failed for '" + path + "'");
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace mppi
