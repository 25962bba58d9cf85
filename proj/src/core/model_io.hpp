#pragma once

#include <string>
#include <string_view>

#include "core/model.hpp"

namespace qcrit {

/// Config schema (JSON):
///
///   {
///     "statistics": "boson" | "fermion",
///     "dimension": 1,
///     "hamiltonian": { "<offset>": { "re": [[a, b], [c, d]], "im": [[a, b], [c, d]] } },
///     "lindblads": [ { "<offset>": [re1, im1, re2, im2] } ],
///     "params": { "<name>": <number> }
///   }
///
/// Every coefficient is a JSON number or an expression string over params.
/// `re`/`im` may be omitted (zero). Unknown keys are rejected.
ModelSpec model_from_json(std::string_view text);
std::string model_to_json(const ModelSpec& spec, int indent = 2);

}  // namespace qcrit
