#pragma once

#include <stdexcept>
#include <string>

#include "mvpois/models.hpp"

namespace mvpois {

/// Raised on malformed or invalid model documents; `field` names the
/// offending entry.
class ModelParseError : public std::runtime_error {
 public:
  ModelParseError(const std::string& field, const std::string& message)
      : std::runtime_error("field '" + field + "': " + message), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses a model document: {"model":"common|comonotonic|thinning", ...};
/// the thinning probability matrix is row-major, d rows by l columns.
ModelParams parse_model_json(const std::string& text);
ModelParams load_model_file(const std::string& path);

std::string model_to_json(const ModelParams& params, int indent = 2);

}  // namespace mvpois
