#pragma once

#include <string>

#include "forestkernel/model.hpp"

namespace fk {

/// Binary model archive. Fixed little-endian encoding, fixed integer widths,
/// flat node arrays; byte layout documented in docs/model_format.md.
/// Load re-validates every FittedModel invariant; a mismatching magic tag,
/// unknown schema version or truncated section is reported distinctly and
/// never partially loaded.
inline constexpr char kModelMagic[8] = {'F', 'K', 'F', 'O', 'R', 'S', 'T', '1'};
inline constexpr std::uint32_t kModelSchemaVersion = 1;

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace fk
