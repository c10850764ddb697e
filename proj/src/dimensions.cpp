#include "monolocal/dimensions.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "monolocal/random.hpp"

namespace monolocal {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Comma split with double-quoted fields ("" escapes a quote).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_mm(const std::string& field, int line_no, const char* name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": bad " + name + " '" + field + "'");
}

}  // namespace

void VehicleSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidArgument, "spec '" + model_id + "': " + what);
  };
  if (model_id.empty()) fail("empty model_id");
  if (!(length_mm > 2000 && length_mm < 7000)) fail("length_mm outside (2000, 7000)");
  if (!(width_mm > 1200 && width_mm < 2400)) fail("width_mm outside (1200, 2400)");
  if (!(height_mm > 900 && height_mm < 2500)) fail("height_mm outside (900, 2500)");
  if (!(wheelbase_mm > 0 && wheelbase_mm < length_mm)) fail("wheelbase_mm must be in (0, length_mm)");
}

SpecDatabase::SpecDatabase(std::vector<VehicleSpec> specs) : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    specs_[i].validate();
    if (!index_.emplace(specs_[i].model_id, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate model_id '" + specs_[i].model_id + "'");
    }
  }
}

SpecDatabase SpecDatabase::parse_csv(const std::string& text) {
  static const std::vector<std::string> kHeader{"model_id",  "display_name", "length_mm", "width_mm",
                                                "height_mm", "wheelbase_mm", "source"};
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<VehicleSpec> specs;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto f = split_csv(line);
    if (!header_seen) {
      if (f != kHeader) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad header");
      header_seen = true;
      continue;
    }
    if (f.size() != kHeader.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 7 fields");
    }
    VehicleSpec s{f[0],
                  f[1],
                  parse_mm(f[2], line_no, "length_mm"),
                  parse_mm(f[3], line_no, "width_mm"),
                  parse_mm(f[4], line_no, "height_mm"),
                  parse_mm(f[5], line_no, "wheelbase_mm"),
                  f[6]};
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(s.model_id).second) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate model_id");
    }
    specs.push_back(std::move(s));
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "spec database is empty");
  return SpecDatabase(std::move(specs));
}

SpecDatabase SpecDatabase::load(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

SpecDatabase SpecDatabase::load_default() {
  return load(std::filesystem::path(MONOLOCAL_DATA_DIR) / "vehicle_specs.csv");
}

bool SpecDatabase::contains(const std::string& model_id) const { return index_.count(model_id) > 0; }

const VehicleSpec& SpecDatabase::at(const std::string& model_id) const {
  const auto it = index_.find(model_id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownModel, "model '" + model_id + "' not in database");
  return specs_[it->second];
}

void Prediction::validate() const {
  if (ranked.empty()) throw Error(ErrorCode::ProtocolError, "prediction is empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& [id, conf] = ranked[i];
    if (id.empty()) throw Error(ErrorCode::ProtocolError, "empty model_id in prediction");
    if (!seen.insert(id).second) throw Error(ErrorCode::ProtocolError, "duplicate model_id '" + id + "'");
    if (!(conf >= 0.0 && conf <= 1.0)) throw Error(ErrorCode::ProtocolError, "confidence outside [0, 1]");
    if (i > 0 && conf > ranked[i - 1].second) {
      throw Error(ErrorCode::ProtocolError, "confidences must be non-increasing");
    }
  }
}

ConfusionTable ConfusionTable::identity() { return {}; }

void ConfusionTable::set(const std::string& actual, const std::string& predicted, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
  rows_[actual][predicted] = p;
}

void ConfusionTable::validate() const {
  for (const auto& [actual, row] : rows_) {
    double sum = 0.0;
    for (const auto& [pred, p] : row) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "confusion row '" + actual + "' does not sum to 1");
    }
  }
}

ConfusionTable ConfusionTable::parse_csv(const std::string& text) {
  ConfusionTable t;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 fields");
    if (f[0] == "actual") continue;
    t.set(f[0], f[1], parse_mm(f[2], line_no, "probability"));
  }
  t.validate();
  return t;
}

ConfusionTable ConfusionTable::load(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::vector<std::pair<std::string, double>> ConfusionTable::row(const std::string& actual) const {
  const auto it = rows_.find(actual);
  if (it == rows_.end()) return {{actual, 1.0}};
  return {it->second.begin(), it->second.end()};
}

MockClassifier::MockClassifier(const SpecDatabase& db, std::uint64_t seed) : db_(&db), rng_(seed) {}

void MockClassifier::set_label(const std::string& key, std::vector<std::string> ranked_ids) {
  if (ranked_ids.empty()) throw Error(ErrorCode::InvalidArgument, "label '" + key + "' has no models");
  for (const auto& id : ranked_ids) db_->at(id);
  labels_[key] = std::move(ranked_ids);
}

void MockClassifier::load_label_map(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto f = split_csv(line);
    if (f.size() < 2) throw Error(ErrorCode::ParseError, "label map row needs a key and a model");
    const std::string key = f[0];
    f.erase(f.begin());
    set_label(key, std::move(f));
  }
}

Prediction MockClassifier::classify(const RasterImage& roi, const ClassifyContext& ctx) {
  if (roi.empty()) throw Error(ErrorCode::InvalidArgument, "empty ROI");
  std::vector<std::string> ids;
  if (const auto it = labels_.find(ctx.fixture_key); it != labels_.end()) {
    ids = it->second;
  } else if (db_->contains(ctx.fixture_key)) {
    ids = {ctx.fixture_key};
  } else {
    throw Error(ErrorCode::UnknownModel, "no mock label for '" + ctx.fixture_key + "'");
  }

  if (!confusion_.is_identity()) {
    const auto row = confusion_.row(ids.front());
    const double u = uniform01(rng_);
    double cum = 0.0;
    std::string picked = row.back().first;
    for (const auto& [id, p] : row) {
      cum += p;
      if (u < cum) {
        picked = id;
        break;
      }
    }
    db_->at(picked);
    std::erase(ids, picked);
    ids.insert(ids.begin(), picked);
  }

  Prediction pred;
  double conf = 1.0;
  for (const auto& id : ids) {
    pred.ranked.emplace_back(id, conf);
    conf *= 0.5;
  }
  return pred;
}

void OverrideClassifier::add_range(std::size_t first, std::size_t last, const std::string& model_id) {
  if (last < first) throw Error(ErrorCode::InvalidArgument, "override range is reversed");
  db_->at(model_id);
  ranges_.push_back({first, last, model_id});
}

Prediction OverrideClassifier::classify(const RasterImage&, const ClassifyContext& ctx) {
  for (const auto& r : ranges_) {
    if (ctx.frame_index >= r.first && ctx.frame_index <= r.last) return {{{r.model_id, 1.0}}};
  }
  throw Error(ErrorCode::UnknownModel, "no override for frame " + std::to_string(ctx.frame_index));
}

std::string_view to_string(DimensionSource s) {
  switch (s) {
    case DimensionSource::Mock: return "mock";
    case DimensionSource::Sidecar: return "sidecar";
    case DimensionSource::GroundTruthOverride: return "ground-truth-override";
  }
  return "unknown";
}

DimensionEstimate estimate_dimensions(const Prediction& pred, const SpecDatabase& db, DimensionSource source) {
  if (pred.ranked.empty()) throw Error(ErrorCode::InvalidArgument, "empty prediction");
  return {db.at(pred.top()), source};
}

DimensionError dimension_error(const VehicleSpec& actual, const VehicleSpec& estimated) {
  auto pct = [](double act, double est) { return std::abs(est - act) / act * 100.0; };
  return {pct(actual.length_mm, estimated.length_mm), pct(actual.width_mm, estimated.width_mm),
          pct(actual.height_mm, estimated.height_mm)};
}

}  // namespace monolocal
