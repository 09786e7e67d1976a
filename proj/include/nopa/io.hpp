#pragma once

#include "nopa/gaussian.hpp"
#include "nopa/model.hpp"
#include "nopa/spectra.hpp"
#include "nopa/stability.hpp"
#include "nopa/sweep.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace nopa {

using Json = nlohmann::ordered_json;
using Metadata = std::vector<std::pair<std::string, std::string>>;

Json to_json(const NetworkConfig& c);
NetworkConfig network_config_from_json(const Json& j);

/// Flat key=value view of a configuration, used for CSV headers.
Metadata config_metadata(const NetworkConfig& c);

/// Ordered state, input and output labels of an N-chain.
Json index_map_json(int n_nopas);

Json to_json(const HurwitzResult& h);
Json to_json(const StabilityReport& r);
Json to_json(const DdeSpectrumReport& r);
Json to_json(const SqueezingSpectrum& s);
Json to_json(const NegativityReport& r);
Json to_json(const std::vector<NegativityReport>& reports);
Json to_json(const SweepRow& r);
Json to_json(const SweepResult& r);

/// Columns n, scenario, x_th.
std::string threshold_table_csv(const std::vector<StabilityReport>& reports, const Metadata& metadata = {},
                                std::optional<int> decimals = std::nullopt);

/// Columns t and one E column per tracked pair.
std::string trajectory_csv(const NegativityTrajectory& t, const Metadata& metadata = {});

/// Wraps a payload as {"toolkit_version", "run_config", "result"}.
Json with_provenance(const Json& run_config, Json result);

/// Two-space indented JSON terminated by a newline.
std::string dump(const Json& j);

}  // namespace nopa
