#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codec/mj.h"

namespace codec {

// The fourteen evidence types. Surrounding methods contribute four separate
// types, each with its own learned variance.
enum class EvidenceType : std::size_t {
  kClassName = 0,
  kFieldTypes,
  kSurroundingReturnTypes,
  kSurroundingFormalParams,
  kSurroundingApiSequences,
  kSurroundingMethodNames,
  kMethodName,
  kJavadoc,
  kApiCalls,
  kApiSequences,
  kReturnType,
  kFormalParams,
  kTypes,
  kKeywords,
};

inline constexpr std::size_t kNumEvidenceTypes = 14;

// Stable identifiers used as JSON keys.
std::string_view evidence_type_name(EvidenceType type);
std::optional<EvidenceType> evidence_type_from_name(std::string_view name);

using EvidenceInstance = std::vector<std::string>;

struct ContextBundle {
  std::array<std::vector<EvidenceInstance>, kNumEvidenceTypes> evidences;

  std::vector<EvidenceInstance>& operator[](EvidenceType t) {
    return evidences[static_cast<std::size_t>(t)];
  }
  const std::vector<EvidenceInstance>& operator[](EvidenceType t) const {
    return evidences[static_cast<std::size_t>(t)];
  }
  std::size_t instance_count() const;

  bool operator==(const ContextBundle&) const = default;
};

// "readFully" -> {read, fully}; "HTMLParser2x" -> {html, parser, 2, x}.
// Underscores and other non-alphanumerics separate words.
std::vector<std::string> split_camel_case(std::string_view identifier);

// Whitespace/punctuation split, lowercased; @-tags are dropped.
std::vector<std::string> tokenize_javadoc(std::string_view text);

// Evidence for the method at `target` of `unit`. Types stay verbatim,
// identifiers are camel-split and lowercased; unknown (`?`) names and types
// contribute nothing. Throws UsageError if target is out of range.
ContextBundle extract_context(const ClassUnit& unit, std::size_t target);

// Index of the single hole method. Throws DataError ("ambiguous query") when
// the unit has zero or several holes.
std::size_t find_hole(const ClassUnit& unit);

// Locates the single hole across all classes of a file.
struct HoleLocation {
  std::size_t class_index;
  std::size_t method_index;
};
HoleLocation find_hole(const std::vector<ClassUnit>& units);

}  // namespace codec
