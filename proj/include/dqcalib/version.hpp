#pragma once

namespace dqcalib {

inline constexpr const char* kVersion = "0.1.0";
/// Bumped whenever a field of the CLI JSON output changes meaning.
inline constexpr int kOutputSchemaVersion = 1;

}  // namespace dqcalib
