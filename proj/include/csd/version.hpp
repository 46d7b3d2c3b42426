#ifndef CSD_VERSION_HPP_
#define CSD_VERSION_HPP_

namespace csd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace csd

#endif  // CSD_VERSION_HPP_
