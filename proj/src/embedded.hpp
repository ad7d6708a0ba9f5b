#pragma once

#include <string_view>

namespace mred::detail {

// Contents of data/decision_cues.json, generated at configure time.
extern const std::string_view kDecisionCuesJson;

}  // namespace mred::detail
