#include "mvpois/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mvpois {

namespace {

using nlohmann::json;

double get_number(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ModelParseError(field, "missing");
  if (!j[field].is_number()) throw ModelParseError(field, "must be a number");
  return j[field].get<double>();
}

std::vector<double> get_number_array(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ModelParseError(field, "missing");
  if (!j[field].is_array() || j[field].empty()) throw ModelParseError(field, "must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j[field]) {
    if (!v.is_number()) throw ModelParseError(field, "entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

ModelParams parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelParseError("(document)", e.what());
  }
  if (!j.contains("model") || !j["model"].is_string()) {
    throw ModelParseError("model", "missing discriminator (common|comonotonic|thinning)");
  }
  std::string kind = j["model"].get<std::string>();
  try {
    if (kind == "common") {
      CommonShockParams p;
      p.theta0 = get_number(j, "theta0");
      p.thetas = get_number_array(j, "thetas");
      validate(p);
      return p;
    }
    if (kind == "comonotonic") {
      ComonotonicParams p;
      p.lambdas = get_number_array(j, "lambdas");
      p.theta = get_number(j, "theta");
      validate(p);
      return p;
    }
    if (kind == "thinning") {
      ThinningParams p;
      p.thetas = get_number_array(j, "thetas");
      if (!j.contains("probs") || !j["probs"].is_array() || j["probs"].empty()) {
        throw ModelParseError("probs", "must be a nonempty array of rows (d rows, l columns)");
      }
      for (const auto& row : j["probs"]) {
        if (!row.is_array()) throw ModelParseError("probs", "rows must be arrays");
        std::vector<double> r;
        for (const auto& v : row) {
          if (!v.is_number()) throw ModelParseError("probs", "entries must be numbers");
          r.push_back(v.get<double>());
        }
        p.probs.push_back(std::move(r));
      }
      validate(p);
      return p;
    }
  } catch (const std::domain_error& e) {
    throw ModelParseError(kind, e.what());
  }
  throw ModelParseError("model", "unknown model '" + kind + "'");
}

ModelParams load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

std::string model_to_json(const ModelParams& params, int indent) {
  json j;
  if (const auto* c = std::get_if<CommonShockParams>(&params)) {
    j["model"] = "common";
    j["theta0"] = c->theta0;
    j["thetas"] = c->thetas;
  } else if (const auto* m = std::get_if<ComonotonicParams>(&params)) {
    j["model"] = "comonotonic";
    j["lambdas"] = m->lambdas;
    j["theta"] = m->theta;
  } else {
    const auto& t = std::get<ThinningParams>(params);
    j["model"] = "thinning";
    j["thetas"] = t.thetas;
    j["probs"] = t.probs;
  }
  return j.dump(indent);
}

}  // namespace mvpois
