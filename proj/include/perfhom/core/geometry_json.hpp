#pragma once

#include <string>

#include "perfhom/core/geometry.hpp"

namespace perfhom {

/// {domain, epsilon, eta, radii:[R1,R2,R3], cavities:[{center:[x,y], shape:{kind, fourier_or_samples}}]}
std::string perforation_to_json(const Perforation& p, int indent = 2);
Perforation perforation_from_json(const std::string& text);

Perforation read_perforation(const std::string& path);
void write_perforation(const Perforation& p, const std::string& path);

}  // namespace perfhom
