#pragma once

#include <string>

#include "voxsae/core/error.hpp"

namespace voxsae {

enum class Label { HC = 0, PD = 1 };
enum class Language { Fr = 0, En = 1 };
enum class Sex { M = 0, F = 1 };

inline const char* to_string(Label l) { return l == Label::PD ? "PD" : "HC"; }
inline const char* to_string(Language l) { return l == Language::En ? "En" : "Fr"; }
inline const char* to_string(Sex s) { return s == Sex::F ? "F" : "M"; }

inline Label parse_label(const std::string& s) {
  if (s == "PD") return Label::PD;
  if (s == "HC") return Label::HC;
  throw InputError("label must be PD or HC, got '" + s + "'");
}
inline Language parse_language(const std::string& s) {
  if (s == "Fr") return Language::Fr;
  if (s == "En") return Language::En;
  throw InputError("language must be Fr or En, got '" + s + "'");
}
inline Sex parse_sex(const std::string& s) {
  if (s == "M") return Sex::M;
  if (s == "F") return Sex::F;
  throw InputError("sex must be M or F, got '" + s + "'");
}

/// Per-sample metadata shared by every stage.
struct SampleMeta {
  std::string id;
  std::string speaker;
  Label label = Label::HC;
  Language language = Language::Fr;
  Sex sex = Sex::M;
};

}  // namespace voxsae
