#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "monolocal/image.hpp"

namespace monolocal {

struct VehicleSpec {
  std::string model_id;
  std::string display_name;
  double length_mm = 0.0;
  double width_mm = 0.0;
  double height_mm = 0.0;
  double wheelbase_mm = 0.0;
  std::string source;

  // Throws InvalidArgument naming the violated bound.
  void validate() const;
};

class SpecDatabase {
 public:
  SpecDatabase() = default;
  explicit SpecDatabase(std::vector<VehicleSpec> specs);

  // CSV with header model_id,display_name,length_mm,width_mm,height_mm,wheelbase_mm,source
  static SpecDatabase parse_csv(const std::string& text);
  static SpecDatabase load(const std::filesystem::path& path);
  // The database shipped in data/.
  static SpecDatabase load_default();

  bool contains(const std::string& model_id) const;
  const VehicleSpec& at(const std::string& model_id) const;  // UnknownModel if absent
  const std::vector<VehicleSpec>& all() const noexcept { return specs_; }

 private:
  std::vector<VehicleSpec> specs_;
  std::map<std::string, std::size_t> index_;
};

struct Prediction {
  std::vector<std::pair<std::string, double>> ranked;

  // Non-empty, distinct ids, confidences in [0,1] and non-increasing.
  // Throws ProtocolError.
  void validate() const;
  const std::string& top() const { return ranked.front().first; }
};

struct ClassifyContext {
  std::string fixture_key;  // e.g. the frame's "fixture" tag or file stem
  std::size_t frame_index = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Prediction classify(const RasterImage& roi, const ClassifyContext& ctx) = 0;
  virtual std::string_view source() const = 0;
};

// Row-stochastic actual -> predicted table.
class ConfusionTable {
 public:
  static ConfusionTable identity();
  // CSV rows "actual,predicted,probability"; each row's probabilities must sum to 1.
  static ConfusionTable parse_csv(const std::string& text);
  static ConfusionTable load(const std::filesystem::path& path);

  void set(const std::string& actual, const std::string& predicted, double p);
  void validate() const;
  bool is_identity() const noexcept { return rows_.empty(); }
  // Entries for `actual` sorted by model id; identity when the row is absent.
  std::vector<std::pair<std::string, double>> row(const std::string& actual) const;

 private:
  std::map<std::string, std::map<std::string, double>> rows_;
};

// Deterministic stand-in for the network. The fixture key selects a ranked list
// from the label map (or is itself the model id); an optional confusion table
// then resamples the top-1 with a seeded generator.
class MockClassifier : public Classifier {
 public:
  MockClassifier(const SpecDatabase& db, std::uint64_t seed = 0);

  void set_label(const std::string& key, std::vector<std::string> ranked_ids);
  // CSV rows "key,model_id[,model_id...]"
  void load_label_map(const std::filesystem::path& path);
  void set_confusion(ConfusionTable table) { confusion_ = std::move(table); }

  Prediction classify(const RasterImage& roi, const ClassifyContext& ctx) override;
  std::string_view source() const override { return "mock"; }

 private:
  const SpecDatabase* db_;
  std::map<std::string, std::vector<std::string>> labels_;
  ConfusionTable confusion_ = ConfusionTable::identity();
  std::mt19937_64 rng_;
};

// Frame ranges [first, last] mapped to a known model id.
class OverrideClassifier : public Classifier {
 public:
  explicit OverrideClassifier(const SpecDatabase& db) : db_(&db) {}
  void add_range(std::size_t first, std::size_t last, const std::string& model_id);
  Prediction classify(const RasterImage& roi, const ClassifyContext& ctx) override;
  std::string_view source() const override { return "ground-truth-override"; }

 private:
  struct Range {
    std::size_t first, last;
    std::string model_id;
  };
  const SpecDatabase* db_;
  std::vector<Range> ranges_;
};

struct SidecarOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::chrono::milliseconds timeout{2000};
  int top_k = 5;
};

// Client for the HTTP /classify protocol. Safe to call from several threads;
// at most four requests are in flight at once.
class SidecarClassifier : public Classifier {
 public:
  SidecarClassifier(const SpecDatabase& db, SidecarOptions options);
  ~SidecarClassifier() override;

  Prediction classify(const RasterImage& roi, const ClassifyContext& ctx) override;
  std::string_view source() const override { return "sidecar"; }

  static constexpr int kMaxInFlight = 4;
  int peak_in_flight() const noexcept { return peak_.load(); }

 private:
  const SpecDatabase* db_;
  SidecarOptions options_;
  std::counting_semaphore<kMaxInFlight> slots_{kMaxInFlight};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

// Request body and response parsing, shared with tests.
std::string encode_classify_request(const RasterImage& roi, int top_k);
Prediction parse_classify_response(const std::string& body, const SpecDatabase& db);

enum class DimensionSource { Mock, Sidecar, GroundTruthOverride };
std::string_view to_string(DimensionSource s);

struct DimensionEstimate {
  VehicleSpec spec;
  DimensionSource source = DimensionSource::Mock;
};

// Trusts the top-1 prediction; never falls back to lower ranks.
DimensionEstimate estimate_dimensions(const Prediction& pred, const SpecDatabase& db,
                                      DimensionSource source = DimensionSource::Mock);

struct DimensionError {
  double length_pct = 0.0, width_pct = 0.0, height_pct = 0.0;
};
DimensionError dimension_error(const VehicleSpec& actual, const VehicleSpec& estimated);

}  // namespace monolocal
