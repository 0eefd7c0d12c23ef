#pragma once

#include <string_view>

namespace neurotopo {

/// Units of filtration values. Under `radius`, every value is exactly half
/// the `diameter` value of the same simplex.
enum class Scale { diameter, radius };

std::string_view to_string(Scale scale);

/// Accepts "diameter" or "radius"; throws DataError otherwise.
Scale parse_scale(std::string_view text);

}  // namespace neurotopo
