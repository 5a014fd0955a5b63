#pragma once

#include <json.hpp>

#include "extphase/transform/map.hpp"

namespace xps::transform {

inline void to_json(nlohmann::json& j, const TransformReport& r) {
  j = nlohmann::json{{"hessian_det", r.hessian_det},
                     {"preserves_H1", r.preserves_H1},
                     {"time_global", r.time_global},
                     {"spacetime_split", r.spacetime_split},
                     {"subspace_liouville", r.subspace_liouville},
                     {"liouville_det", r.liouville_det},
                     {"probe_based", r.probe_based}};
}

}  // namespace xps::transform
