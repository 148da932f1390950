#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

namespace sawlab::estimate {

namespace {

const FitParam& find(const std::vector<FitParam>& params, std::string_view name) {
  auto it = std::find_if(params.begin(), params.end(), [&](const FitParam& p) { return p.name == name; });
  if (it == params.end()) throw std::out_of_range("fit parameter not found: " + std::string(name));
  return *it;
}

// JSON has no inf/nan; encode them as strings so reports stay parseable.
nlohmann::ordered_json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double parse_number(const nlohmann::ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

bool FitResult::has(std::string_view name) const {
  return std::any_of(params.begin(), params.end(), [&](const FitParam& p) { return p.name == name; });
}

double FitResult::value(std::string_view name) const { return find(params, name).value; }

double FitResult::sigma(std::string_view name) const { return find(params, name).sigma; }

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void FitResult::add(std::string name, double value, double sigma) {
  params.push_back({std::move(name), value, std::isnan(sigma) ? sigma : std::abs(sigma)});
}

std::string FitResult::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["model"] = model;
  auto p = nlohmann::ordered_json::object();
  auto s = nlohmann::ordered_json::object();
  for (const auto& fp : params) {
    p[fp.name] = number_or_string(fp.value);
    s[fp.name] = number_or_string(fp.sigma);
  }
  j["params"] = std::move(p);
  j["sigma"] = std::move(s);
  j["residual_norm"] = number_or_string(residual_norm);
  j["converged"] = converged;
  j["n_iter"] = n_iter;
  j["flags"] = flags;
  j["notes"] = notes;
  return j.dump(indent) + "\n";
}

FitResult FitResult::from_json(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("fit report is not valid JSON: ") + e.what());
  }
  FitResult r;
  try {
    r.model = j.at("model").get<std::string>();
    for (const auto& [name, v] : j.at("params").items()) {
      const double sig = j.at("sigma").contains(name) ? parse_number(j.at("sigma").at(name)) : 0.0;
      r.params.push_back({name, parse_number(v), sig});
    }
    r.residual_norm = parse_number(j.at("residual_norm"));
    r.converged = j.at("converged").get<bool>();
    r.n_iter = j.at("n_iter").get<int>();
    if (j.contains("flags")) r.flags = j.at("flags").get<std::vector<std::string>>();
    if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed fit report: ") + e.what());
  }
  return r;
}

}  // namespace sawlab::estimate
