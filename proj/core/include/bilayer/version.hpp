#ifndef BILAYER_VERSION_HPP
#define BILAYER_VERSION_HPP

namespace bilayer {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace bilayer

#endif
