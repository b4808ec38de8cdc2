#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfsv/calibration.hpp"
#include "cfsv/curves.hpp"
#include "cfsv/model.hpp"

namespace cfsv::io {

// Params:  {"sigma":..,"beta1":..,"beta2":..,"R":..,"rho":..,"beta":..,"alpha":..,"rho1":..,"rho2":..}
// Curves:  {"forwards":[[T,F],...],"discounts":[[T,D],...]}   (discounts optional)
// Quotes:  [{"t_e":..,"T":..,"K":..,"vol":..,"weight":..}, ...]  (weight optional, default 1)
//
// Malformed documents raise InvalidConfig.

ModelParams params_from_json(std::string_view text);
std::string params_to_json(const ModelParams& p);

MarketCurves curves_from_json(std::string_view text);
std::string curves_to_json(const MarketCurves& c);

std::vector<VolQuote> quotes_from_json(std::string_view text);
std::string quotes_to_json(const std::vector<VolQuote>& quotes);

/// Whole file as a string; InvalidConfig if it cannot be read.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

ModelParams load_params(const std::filesystem::path& path);
MarketCurves load_curves(const std::filesystem::path& path);
std::vector<VolQuote> load_quotes(const std::filesystem::path& path);

}  // namespace cfsv::io
