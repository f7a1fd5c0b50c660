#include "laserplan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <json.hpp>

#include "laserplan/error.hpp"

namespace laserplan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan" || text == "NaN" || text == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::IoError, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

std::string format_heightfield(const HeightField& h) {
  const GridSpec& g = h.grid();
  std::string out = "heightfield 1\n";
  out += "origin " + format_double(g.origin.x()) + " " + format_double(g.origin.y()) + "\n";
  out += "spacing " + format_double(g.spacing.x()) + " " + format_double(g.spacing.y()) + "\n";
  out += "size " + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out += ' ';
      out += h.valid(i, j) ? format_double(h(i, j)) : "nan";
    }
    out += '\n';
  }
  return out;
}

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw Error(ErrorCode::IoError, "heightfield: unexpected end of input");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    if (next() != word) throw Error(ErrorCode::IoError, "heightfield: expected '" + std::string(word) + "'");
  }

  int integer() {
    const auto t = next();
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw Error(ErrorCode::IoError, "heightfield: bad integer '" + std::string(t) + "'");
    }
    return v;
  }

  bool done() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

HeightField parse_heightfield(std::string_view text) {
  Tokens t(text);
  t.expect("heightfield");
  if (t.integer() != 1) throw Error(ErrorCode::IoError, "heightfield: unsupported version");
  GridSpec g;
  t.expect("origin");
  g.origin.x() = parse_double(t.next());
  g.origin.y() = parse_double(t.next());
  t.expect("spacing");
  g.spacing.x() = parse_double(t.next());
  g.spacing.y() = parse_double(t.next());
  t.expect("size");
  g.nx = t.integer();
  g.ny = t.integer();
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::IoError, std::string("heightfield: ") + e.what());
  }
  HeightField h = HeightField::empty(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = parse_double(t.next());
    if (!std::isnan(v)) h.set(k, v);
  }
  if (!t.done()) throw Error(ErrorCode::IoError, "heightfield: trailing data");
  return h;
}

void write_heightfield(const fs::path& path, const HeightField& h) { write_text_atomic(path, format_heightfield(h)); }

HeightField read_heightfield(const fs::path& path) { return parse_heightfield(read_text(path)); }

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw Error(ErrorCode::IoError, "csv: missing column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t p = 0;
    while (true) {
      const std::size_t comma = line.find(',', p);
      std::string_view f = line.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p);
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      fields.emplace_back(f);
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size()) {
        throw Error(ErrorCode::IoError, "csv: row " + std::to_string(t.rows.size() + 1) + " has " +
                                            std::to_string(fields.size()) + " fields, header has " +
                                            std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw Error(ErrorCode::IoError, "csv: empty input");
  return t;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  const auto line = [&](const std::vector<std::string>& f) {
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (c) out += ',';
      out += f[c];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

PointCloud3 parse_point_cloud_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t cx = t.column("x"), cy = t.column("y"), cz = t.column("z");
  PointCloud3 cloud;
  if (t.has_column("label")) cloud.labels.emplace();
  const std::size_t cl = t.has_column("label") ? t.column("label") : 0;
  for (const auto& r : t.rows) {
    cloud.points.emplace_back(parse_double(r[cx]), parse_double(r[cy]), parse_double(r[cz]));
    if (cloud.labels) cloud.labels->push_back(static_cast<int>(parse_double(r[cl])));
  }
  return cloud;
}

std::string format_point_cloud_csv(const PointCloud3& cloud) {
  CsvTable t;
  t.header = {"x", "y", "z"};
  if (cloud.labels) t.header.push_back("label");
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto& p = cloud.points[k];
    std::vector<std::string> row{format_double(p.x()), format_double(p.y()), format_double(p.z())};
    if (cloud.labels) row.push_back(std::to_string((*cloud.labels)[k]));
    t.rows.push_back(std::move(row));
  }
  return format_csv(t);
}

namespace {

const char* const kPoseFields[] = {"r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22", "tx", "ty", "tz"};

RigidTransform pose_from(const CsvTable& t, const std::vector<std::string>& row, const std::string& prefix) {
  double v[12];
  for (int k = 0; k < 12; ++k) v[k] = parse_double(row[t.column(prefix + kPoseFields[k])]);
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return {RigidTransform::nearest_rotation(r), Eigen::Vector3d(v[9], v[10], v[11])};
}

void pose_into(std::vector<std::string>& row, const RigidTransform& p) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) row.push_back(format_double(p.rotation()(a, b)));
  }
  for (int a = 0; a < 3; ++a) row.push_back(format_double(p.translation()(a)));
}

}  // namespace

std::vector<PosePair> parse_pose_pairs_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  std::vector<PosePair> out;
  for (const auto& r : t.rows) out.push_back({pose_from(t, r, "a_"), pose_from(t, r, "b_")});
  return out;
}

std::string format_pose_pairs_csv(std::span<const PosePair> pairs) {
  CsvTable t;
  for (const char* prefix : {"a_", "b_"}) {
    for (const char* f : kPoseFields) t.header.push_back(std::string(prefix) + f);
  }
  for (const auto& p : pairs) {
    std::vector<std::string> row;
    pose_into(row, p.A);
    pose_into(row, p.B);
    t.rows.push_back(std::move(row));
  }
  return format_csv(t);
}

std::vector<CraterCenter> parse_crater_centers_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t cx = t.column("cx"), cy = t.column("cy"), cz = t.column("z");
  std::vector<CraterCenter> out;
  for (const auto& r : t.rows) out.push_back({{parse_double(r[cx]), parse_double(r[cy])}, parse_double(r[cz])});
  return out;
}

std::string format_cuts_csv(std::span<const CutRecord> cuts) {
  CsvTable t;
  t.header = {"step", "mu_x", "mu_y", "theta_x", "theta_y", "duty", "predicted_cost"};
  for (const auto& c : cuts) {
    t.rows.push_back({std::to_string(c.step), format_double(c.cut.mu.x()), format_double(c.cut.mu.y()),
                      format_double(c.cut.theta_deg.x()), format_double(c.cut.theta_deg.y()),
                      format_double(c.cut.duty), format_double(c.predicted_cost)});
  }
  return format_csv(t);
}

namespace {

json metrics_json(const MetricReport& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}, {"pct_overcut", m.pct_overcut}, {"pct_undercut", m.pct_undercut},
          {"iou", m.iou}};
}

MetricReport metrics_from(const json& j) {
  MetricReport m;
  m.rmse = j.at("rmse").get<double>();
  m.mae = j.at("mae").get<double>();
  m.pct_overcut = j.at("pct_overcut").get<double>();
  m.pct_undercut = j.at("pct_undercut").get<double>();
  m.iou = j.at("iou").get<double>();
  return m;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t unhex(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error(ErrorCode::IoError, "bad hash " + s);
  return v;
}

}  // namespace

std::string format_log_jsonl(const ExecutionLog& log) {
  std::string out;
  const auto emit = [&](const json& j) {
    out += j.dump();
    out += '\n';
  };
  emit({{"record", "header"}, {"mode", log.mode}, {"seed", log.seed}, {"objective_volume", log.objective_volume}});
  for (const auto& c : log.cuts) {
    emit({{"record", "cut"},
          {"step", c.step},
          {"mu", {c.cut.mu.x(), c.cut.mu.y()}},
          {"theta_deg", {c.cut.theta_deg.x(), c.cut.theta_deg.y()}},
          {"duty", c.cut.duty},
          {"dwell_s", c.cut.dwell_s},
          {"predicted_cost", c.predicted_cost},
          {"predicted_hash", hex(c.predicted_hash)},
          {"wall_s", c.wall_s}});
  }
  for (const auto& r : log.rounds) {
    json j{{"record", "round"},
           {"round", r.round},
           {"after_step", r.after_step},
           {"residual_volume", r.residual_volume},
           {"residual_fraction", r.residual_fraction}};
    j["observed_hash"] = r.observed_hash ? json(hex(*r.observed_hash)) : json(nullptr);
    j["metrics"] = r.metrics ? metrics_json(*r.metrics) : json(nullptr);
    emit(j);
  }
  json fin{{"record", "final"}, {"terminated", log.terminated}, {"stalled", log.stalled}};
  fin["metrics"] = log.final_metrics ? metrics_json(*log.final_metrics) : json(nullptr);
  emit(fin);
  return out;
}

ExecutionLog parse_log_jsonl(std::string_view text) {
  ExecutionLog log;
  bool header = false, final = false;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "header") {
        log.mode = j.at("mode").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.objective_volume = j.at("objective_volume").get<double>();
        header = true;
      } else if (kind == "cut") {
        CutRecord c;
        c.step = j.at("step").get<int>();
        c.cut.mu = {j.at("mu").at(0).get<double>(), j.at("mu").at(1).get<double>()};
        c.cut.theta_deg = {j.at("theta_deg").at(0).get<double>(), j.at("theta_deg").at(1).get<double>()};
        c.cut.duty = j.at("duty").get<double>();
        c.cut.dwell_s = j.at("dwell_s").get<double>();
        c.predicted_cost = j.at("predicted_cost").get<double>();
        c.predicted_hash = unhex(j.at("predicted_hash").get<std::string>());
        c.wall_s = j.at("wall_s").get<double>();
        log.cuts.push_back(c);
      } else if (kind == "round") {
        RoundRecord r;
        r.round = j.at("round").get<int>();
        r.after_step = j.at("after_step").get<int>();
        r.residual_volume = j.at("residual_volume").get<double>();
        r.residual_fraction = j.at("residual_fraction").get<double>();
        if (!j.at("observed_hash").is_null()) r.observed_hash = unhex(j.at("observed_hash").get<std::string>());
        if (!j.at("metrics").is_null()) r.metrics = metrics_from(j.at("metrics"));
        log.rounds.push_back(r);
      } else if (kind == "final") {
        log.terminated = j.at("terminated").get<bool>();
        log.stalled = j.at("stalled").get<bool>();
        if (!j.at("metrics").is_null()) log.final_metrics = metrics_from(j.at("metrics"));
        final = true;
      } else {
        throw Error(ErrorCode::IoError, "unknown record '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoError, "log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header || !final) throw Error(ErrorCode::IoError, "log is missing its header or final record");
  return log;
}

}  // namespace laserplan
