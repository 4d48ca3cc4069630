#pragma once

#include <iosfwd>

#include <json.hpp>

#include "otafl/airsim.hpp"
#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/convergence.hpp"
#include "otafl/design.hpp"
#include "otafl/miso.hpp"
#include "otafl/planner.hpp"
#include "otafl/privacy.hpp"

namespace otafl {

using Json = nlohmann::json;

/// Field names match SystemConfig. `snr_db` may replace `noise_var`;
/// infinite epsilons are written as "inf" and read from "inf" or null.
/// Unknown fields raise ConfigError.
Json config_to_json(const SystemConfig& cfg);
SystemConfig config_from_json(const Json& j);

/// Complex values are [re, im] pairs.
Json channel_to_json(const ChannelMatrix& ch);
ChannelMatrix channel_from_json(const Json& j);

Json design_to_json(const TransceiverDesign& d);
TransceiverDesign design_from_json(const Json& j);

Json dp_report_to_json(const DpReport& r);
Json bound_report_to_json(const BoundReport& r);
Json miso_solution_to_json(const MisoSolution& s);
Json planner_trace_to_json(const PlannerTrace& t);
Json train_result_to_json(const TrainResult& r);

/// Columns round,loss,gap.
void write_trajectory_csv(std::ostream& os, const TrainResult& r);

}  // namespace otafl
