#pragma once

namespace sos {

// Stamped into every artifact so outputs can be traced to the code that
// produced them.
inline constexpr const char* kVersion = "1.0.0";

}  // namespace sos
