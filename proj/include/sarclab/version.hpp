#ifndef SARCLAB_VERSION_HPP
#define SARCLAB_VERSION_HPP

namespace sarclab {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
