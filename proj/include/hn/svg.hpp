#pragma once

#include <string>

#include "hn/polygon.hpp"

namespace hn {

/// A single polyline on a unit-gridded viewBox, axes annotated with exact
/// rational labels. Presentation only; CSV/JSON stay the machine truth.
std::string polygon_svg(const ConcavePolygon& p);

} // namespace hn
