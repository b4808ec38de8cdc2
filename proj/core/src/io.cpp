#include "cfsv/io.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cfsv/error.hpp"

namespace cfsv::io {

using json = nlohmann::ordered_json;

namespace {

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidConfig, std::string(what) + ": " + e.what());
  }
}

double number(const json& obj, const char* key, const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end()) raise(ErrorCode::InvalidConfig, std::string(what) + ": missing \"" + key + "\"");
  if (!it->is_number()) raise(ErrorCode::InvalidConfig, std::string(what) + ": \"" + key + "\" must be a number");
  return it->get<double>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) raise(ErrorCode::InvalidConfig, std::string(what) + ": unknown key \"" + key + "\"");
}

std::vector<MarketCurves::Pillar> pillars(const json& arr, const char* what) {
  if (!arr.is_array()) raise(ErrorCode::InvalidConfig, std::string(what) + " must be an array of [T, value]");
  std::vector<MarketCurves::Pillar> out;
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
      raise(ErrorCode::InvalidConfig, std::string(what) + " entries must be [T, value]");
    out.emplace_back(item[0].get<double>(), item[1].get<double>());
  }
  return out;
}

json pillars_json(const std::vector<MarketCurves::Pillar>& v) {
  json arr = json::array();
  for (const auto& [T, x] : v) arr.push_back({T, x});
  return arr;
}

}  // namespace

ModelParams params_from_json(std::string_view text) {
  const json j = parse(text, "params");
  if (!j.is_object()) raise(ErrorCode::InvalidConfig, "params: expected an object");
  reject_unknown(j, {"sigma", "beta1", "beta2", "R", "rho", "beta", "alpha", "rho1", "rho2"}, "params");
  ModelParams p;
  p.sigma = number(j, "sigma", "params");
  p.beta1 = number(j, "beta1", "params");
  p.beta2 = number(j, "beta2", "params");
  p.R = number(j, "R", "params");
  p.rho = number(j, "rho", "params");
  p.beta = number(j, "beta", "params");
  p.alpha = number(j, "alpha", "params");
  p.rho1 = number(j, "rho1", "params");
  p.rho2 = number(j, "rho2", "params");
  return p;
}

std::string params_to_json(const ModelParams& p) {
  json j = {{"sigma", p.sigma}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"R", p.R},       {"rho", p.rho},
            {"beta", p.beta},   {"alpha", p.alpha}, {"rho1", p.rho1},   {"rho2", p.rho2}};
  return j.dump(2);
}

MarketCurves curves_from_json(std::string_view text) {
  const json j = parse(text, "curves");
  if (!j.is_object() || !j.contains("forwards")) raise(ErrorCode::InvalidConfig, "curves: missing \"forwards\"");
  reject_unknown(j, {"forwards", "discounts"}, "curves");
  auto fwd = pillars(j.at("forwards"), "forwards");
  std::vector<MarketCurves::Pillar> disc;
  if (j.contains("discounts")) disc = pillars(j.at("discounts"), "discounts");
  return MarketCurves(std::move(fwd), std::move(disc));
}

std::string curves_to_json(const MarketCurves& c) {
  json j = {{"forwards", pillars_json(c.forwards())}};
  if (!c.discounts().empty()) j["discounts"] = pillars_json(c.discounts());
  return j.dump(2);
}

std::vector<VolQuote> quotes_from_json(std::string_view text) {
  const json j = parse(text, "quotes");
  if (!j.is_array()) raise(ErrorCode::InvalidConfig, "quotes: expected an array");
  std::vector<VolQuote> out;
  for (const auto& item : j) {
    if (!item.is_object()) raise(ErrorCode::InvalidConfig, "quotes: entries must be objects");
    reject_unknown(item, {"t_e", "T", "K", "vol", "weight"}, "quote");
    VolQuote q;
    q.t_e = number(item, "t_e", "quote");
    q.T = number(item, "T", "quote");
    q.strike = number(item, "K", "quote");
    q.market_vol = number(item, "vol", "quote");
    q.weight = item.contains("weight") ? number(item, "weight", "quote") : 1.0;
    validate(q);
    out.push_back(q);
  }
  return out;
}

std::string quotes_to_json(const std::vector<VolQuote>& quotes) {
  json arr = json::array();
  for (const auto& q : quotes)
    arr.push_back({{"t_e", q.t_e}, {"T", q.T}, {"K", q.strike}, {"vol", q.market_vol}, {"weight", q.weight}});
  return arr.dump(2);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::InvalidConfig, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::InvalidConfig, "cannot write " + path.string());
  out << content;
  if (!out) raise(ErrorCode::InvalidConfig, "failed writing " + path.string());
}

ModelParams load_params(const std::filesystem::path& path) { return params_from_json(read_file(path)); }
MarketCurves load_curves(const std::filesystem::path& path) { return curves_from_json(read_file(path)); }
std::vector<VolQuote> load_quotes(const std::filesystem::path& path) { return quotes_from_json(read_file(path)); }

}  // namespace cfsv::io
