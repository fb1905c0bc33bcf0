#ifndef SQZ_VERSION_HPP_
#define SQZ_VERSION_HPP_

namespace sqz {

inline constexpr char kToolName[] = "sqzsim";
inline constexpr char kToolVersion[] = "1.0.0";

}  // namespace sqz

#endif  // SQZ_VERSION_HPP_
