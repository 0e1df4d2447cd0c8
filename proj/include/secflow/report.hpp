#pragma once

#include <string>

#include "json.hpp"
#include "secflow/config.hpp"

namespace secflow {

using Json = nlohmann::json;

/// Deterministic serialization: object keys sorted (the default json map),
/// floats printed with %.17g, non-finite values emitted as null, two-space
/// indentation, trailing newline. Byte-identical across runs and platforms
/// with IEEE doubles.
std::string dump_json(const Json& j);

/// %.17g, for the CSV writer.
std::string format_num(double x);

/// Resolved config as embedded in every report; out_dir and jobs are left
/// out on purpose so reports do not depend on where or how wide they ran.
Json json_of(const RunConfig& c);

Json json_of(const SingularityInfo& s);
Json json_of(const PoincareCocycle& c);
Json json_of(const ConvergenceReport& r);
Json json_of(const SplittingEstimate& s, bool details = false);
Json json_of(const GridCheckReport& r, bool details = false);
Json json_of(const LyapunovReport& r);
Json json_of(const WssReport& r);
Json json_of(const MixedReport& r, bool details = false);
Json json_of(const FiberCrosscheck& f);
Json json_of(const DirectionAttempt& a, bool details = false);
Json json_of(const SingularHyperbolicityReport& r, bool details = false);

}  // namespace secflow
