#pragma once

#include "duc/responses.hpp"

#include <string>
#include <string_view>

namespace duc {

/// Reads |S21| from a Touchstone v1 two-port file. The option line must be
/// `# <HZ|KHZ|MHZ|GHZ> S <DB|MA|RI> R 50`; MA and RI data are converted to
/// dB. Comments (`!`) and blank lines are skipped. Errors carry the line
/// number of the offending record.
TabulatedResponse parse_touchstone(std::string_view text,
                                   Extrapolation extrapolation = Extrapolation::HoldLast);

/// Writes `# HZ S DB R 50` records. Only S21 is retained, so S12 mirrors S21
/// (reciprocal) and S11/S22 are written as -200 dB placeholders.
std::string write_touchstone(const TabulatedResponse& response);

TabulatedResponse load_touchstone(const std::string& path,
                                  Extrapolation extrapolation = Extrapolation::HoldLast);

} // namespace duc
