#ifndef LSHMM_COMMON_HPP
#define LSHMM_COMMON_HPP

#include <string>

#include "lshmm/error.hpp"

namespace lshmm {

enum class Mode { raw, interp };
enum class Scaling { off, on };
enum class Backend { oracle, engine };

inline const char* to_string(Mode m) { return m == Mode::raw ? "raw" : "interp"; }
inline const char* to_string(Scaling s) { return s == Scaling::on ? "on" : "off"; }
inline const char* to_string(Backend b) { return b == Backend::oracle ? "oracle" : "engine"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "raw") return Mode::raw;
  if (s == "interp") return Mode::interp;
  throw InputError("unknown mode '" + s + "' (expected raw|interp)");
}

inline Scaling parse_scaling(const std::string& s) {
  if (s == "on") return Scaling::on;
  if (s == "off") return Scaling::off;
  throw InputError("unknown scaling '" + s + "' (expected on|off)");
}

inline Backend parse_backend(const std::string& s) {
  if (s == "oracle") return Backend::oracle;
  if (s == "engine") return Backend::engine;
  throw InputError("unknown backend '" + s + "' (expected oracle|engine)");
}

}  // namespace lshmm

#endif  // LSHMM_COMMON_HPP
