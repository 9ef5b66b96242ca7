#pragma once

namespace vofdm {

inline constexpr const char* kArtifactName = "vofdm-lab";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace vofdm
