#include "artifacts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "observables.hpp"

namespace nlslab {

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable trajectory_table(const std::map<std::string, ObservableSeries>& series, double horizon) {
  static const std::vector<std::string> columns = {"linf", "l2", "l3", "l4", "l5", "l6", "h_half_dot", "h1",
                                                   "mass", "energy"};
  CsvTable table;
  table.header = {"t"};
  table.header.insert(table.header.end(), columns.begin(), columns.end());
  table.header.insert(table.header.end(), {"A_env", "V_pc", "horizon_flag"});
  auto it = series.find("linf");
  if (it == series.end()) return table;
  const auto& linf = it->second;
  const auto env = decay_envelope(linf);

  // Cursor per column so rows are matched by time in one pass.
  auto lookup = [&](const std::string& name) -> const ObservableSeries* {
    auto s = series.find(name);
    return s == series.end() ? nullptr : &s->second;
  };
  std::vector<const ObservableSeries*> cols;
  for (const auto& c : columns) cols.push_back(lookup(c));
  cols.push_back(lookup("V_pc"));
  std::vector<std::size_t> cursor(cols.size(), 0);

  for (std::size_t r = 0; r < linf.size(); ++r) {
    const double t = linf.times[r];
    std::vector<std::string> row{fmt12(t)};
    std::vector<std::string> values;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string cell;
      if (const auto* s = cols[c]) {
        auto& k = cursor[c];
        while (k < s->size() && s->times[k] < t) ++k;
        if (k < s->size() && s->times[k] == t) cell = fmt12(s->values[k]);
      }
      values.push_back(cell);
    }
    row.insert(row.end(), values.begin(), values.end() - 1);
    row.push_back(fmt12(env.values[r]));
    row.push_back(values.back());
    row.push_back(t > horizon ? "1" : "0");
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string loglog_svg(const std::string& title, const std::vector<PlotLine>& lines, double horizon) {
  const double W = 640, H = 420, left = 70, right = 180, top = 40, bottom = 50;
  double tmin = INFINITY, tmax = 0, vmin = INFINITY, vmax = 0;
  for (const auto& l : lines)
    for (std::size_t i = 0; i < l.t.size(); ++i)
      if (l.t[i] > 0 && l.v[i] > 0) {
        tmin = std::min(tmin, l.t[i]);
        tmax = std::max(tmax, l.t[i]);
        vmin = std::min(vmin, l.v[i]);
        vmax = std::max(vmax, l.v[i]);
      }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
  if (!(tmax > 0)) {
    s << "<text x=\"" << left << "\" y=\"" << H / 2 << "\">no positive samples</text>\n</svg>\n";
    return s.str();
  }
  double lt0 = std::floor(std::log10(tmin)), lt1 = std::ceil(std::log10(tmax));
  double lv0 = std::floor(std::log10(vmin)), lv1 = std::ceil(std::log10(vmax));
  if (lt1 <= lt0) lt1 = lt0 + 1;
  if (lv1 <= lv0) lv1 = lv0 + 1;
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double t) { return left + (std::log10(t) - lt0) / (lt1 - lt0) * pw; };
  auto Y = [&](double v) { return top + (lv1 - std::log10(v)) / (lv1 - lv0) * ph; };
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = lt0; e <= lt1; e += 1) {
    s << "<line x1=\"" << X(std::pow(10, e)) << "\" y1=\"" << top << "\" x2=\"" << X(std::pow(10, e)) << "\" y2=\""
      << top + ph << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << X(std::pow(10, e)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">1e" << e
      << "</text>\n";
  }
  for (double e = lv0; e <= lv1; e += 1) {
    s << "<line x1=\"" << left << "\" y1=\"" << Y(std::pow(10, e)) << "\" x2=\"" << left + pw << "\" y2=\""
      << Y(std::pow(10, e)) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << Y(std::pow(10, e)) + 4 << "\" text-anchor=\"end\">1e" << e
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">t</text>\n";
  if (horizon > 0 && horizon >= std::pow(10, lt0) && horizon <= std::pow(10, lt1))
    s << "<line x1=\"" << X(horizon) << "\" y1=\"" << top << "\" x2=\"" << X(horizon) << "\" y2=\"" << top + ph
      << "\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& l = lines[k];
    const char* col = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < l.t.size(); ++i)
      if (l.t[i] > 0 && l.v[i] > 0) s << X(l.t[i]) << "," << Y(l.v[i]) << " ";
    s << "\"/>\n";
    std::string legend = l.label;
    if (l.fit) {
      const auto& f = *l.fit;
      const double a = std::max(f.window.t_min, std::pow(10, lt0));
      const double b = std::min(f.window.t_max, tmax);
      if (b > a) {
        auto fv = [&](double t) { return std::exp(f.log_constant) * std::pow(t, -f.exponent); };
        s << "<line x1=\"" << X(a) << "\" y1=\"" << Y(fv(a)) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(fv(b))
          << "\" stroke=\"black\" stroke-dasharray=\"6 3\"/>\n";
      }
      legend += " slope -" + fmt12(std::round(f.exponent * 1000) / 1000);
    }
    s << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 + 18 * k << "\" fill=\"" << col << "\">" << legend
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace nlslab
