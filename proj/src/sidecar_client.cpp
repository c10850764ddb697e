#include <httplib.h>

#include <json.hpp>

#include "monolocal/dimensions.hpp"
#include "monolocal/pnm.hpp"

namespace monolocal {

std::string encode_classify_request(const RasterImage& roi, int top_k) {
  const auto ppm = pnm::encode(roi);
  nlohmann::json body{
      {"image_b64", httplib::detail::base64_encode(ppm)},
      {"top_k", top_k},
  };
  return body.dump();
}

Prediction parse_classify_response(const std::string& body, const SpecDatabase& db) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("predictions") || !j["predictions"].is_array()) {
    throw Error(ErrorCode::ProtocolError, "response lacks a 'predictions' array");
  }
  Prediction pred;
  for (const auto& p : j["predictions"]) {
    if (!p.is_object() || !p.contains("model_id") || !p["model_id"].is_string() ||
        !p.contains("confidence") || !p["confidence"].is_number()) {
      throw Error(ErrorCode::ProtocolError, "malformed prediction entry");
    }
    pred.ranked.emplace_back(p["model_id"].get<std::string>(), p["confidence"].get<double>());
  }
  pred.validate();
  for (const auto& [id, conf] : pred.ranked) {
    if (!db.contains(id)) throw Error(ErrorCode::UnknownModel, "sidecar returned unknown model '" + id + "'");
  }
  return pred;
}

SidecarClassifier::SidecarClassifier(const SpecDatabase& db, SidecarOptions options)
    : db_(&db), options_(std::move(options)) {
  if (options_.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
}

SidecarClassifier::~SidecarClassifier() = default;

Prediction SidecarClassifier::classify(const RasterImage& roi, const ClassifyContext&) {
  if (roi.empty()) throw Error(ErrorCode::InvalidArgument, "empty ROI");
  const std::string body = encode_classify_request(roi, options_.top_k);

  slots_.acquire();
  struct Release {
    SidecarClassifier* self;
    ~Release() {
      self->in_flight_.fetch_sub(1);
      self->slots_.release();
    }
  } release{this};
  const int now = in_flight_.fetch_add(1) + 1;
  int peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }

  httplib::Client client(options_.host, options_.port);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  const auto res = client.Post("/classify", body, "application/json");
  if (!res) {
    throw Error(ErrorCode::ClassifierUnavailable,
                "sidecar request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 503) throw Error(ErrorCode::ClassifierUnavailable, "sidecar model not loaded");
  if (res->status != 200) {
    throw Error(ErrorCode::ProtocolError, "sidecar returned HTTP " + std::to_string(res->status));
  }
  return parse_classify_response(res->body, *db_);
}

}  // namespace monolocal
