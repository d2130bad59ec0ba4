#pragma once

namespace hcmon::embedded {

extern const char* const kSimulationPack;
extern const char* const kRuntimePack;
extern const char* const kProfiles;

}  // namespace hcmon::embedded
