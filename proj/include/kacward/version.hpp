#ifndef KACWARD_VERSION_HPP
#define KACWARD_VERSION_HPP

namespace kacward {

inline constexpr const char* kVersion = "0.1.0";

} // namespace kacward

#endif // KACWARD_VERSION_HPP
