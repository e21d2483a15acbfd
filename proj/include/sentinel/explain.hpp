#pragma once

// Short handover alerts rendered from a cluster's DNF label.

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "sentinel/clustering.hpp"
#include "sentinel/cover.hpp"
#include "sentinel/error.hpp"
#include "sentinel/logic.hpp"

namespace sentinel {

enum class Modality : std::uint8_t { generic, object_only, direction_only, object_direction, full_sentence };

inline constexpr std::array<Modality, 5> kAllModalities = {Modality::generic, Modality::object_only,
                                                           Modality::direction_only, Modality::object_direction,
                                                           Modality::full_sentence};

// Short codes used on the command line and in reports.
constexpr std::string_view modality_code(Modality m) noexcept {
  switch (m) {
    case Modality::generic: return "a";
    case Modality::object_only: return "b1";
    case Modality::direction_only: return "b2";
    case Modality::object_direction: return "b3";
    case Modality::full_sentence: return "b4";
  }
  return "?";
}

constexpr std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::generic: return "generic";
    case Modality::object_only: return "object_only";
    case Modality::direction_only: return "direction_only";
    case Modality::object_direction: return "object_direction";
    case Modality::full_sentence: return "full_sentence";
  }
  return "?";
}

inline std::optional<Modality> modality_from_code(std::string_view code) {
  for (Modality m : kAllModalities) {
    if (modality_code(m) == code) return m;
  }
  return std::nullopt;
}

inline constexpr std::string_view kGenericAlert = "Handing over control!";
inline constexpr std::string_view kFallbackAlert = "Hazard detected — handing over control!";

struct AlertTokens {
  std::optional<std::string> object;
  std::optional<std::string> direction;

  friend bool operator==(const AlertTokens&, const AlertTokens&) = default;
};

struct Explanation {
  Modality modality = Modality::generic;
  std::optional<std::string> object_token;
  std::optional<std::string> direction_token;
  std::string text;
  int cluster_id = 0;
  double probability = 0.0;

  friend bool operator==(const Explanation&, const Explanation&) = default;
};

namespace detail {

inline std::optional<std::string> object_word(std::string_view predicate) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 5> words = {{
      {"nearest_is_pedestrian", "pedestrian"},
      {"nearest_is_stopped_car", "stopped car"},
      {"nearest_is_cyclist", "cyclist"},
      {"nearest_is_debris", "debris"},
      {"nearest_is_construction", "construction"},
  }};
  for (auto [name, word] : words) {
    if (name == predicate) return std::string(word);
  }
  return std::nullopt;
}

// In output order.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kDirectionWords = {{
    {"hazard_ahead", "ahead"},
    {"hazard_behind", "behind"},
    {"hazard_left", "left"},
    {"hazard_right", "right"},
    {"hazard_same_lane", "in lane"},
    {"hazard_adjacent", "adjacent"},
}};

inline std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace detail

// Tokens come from the clause covering the most targets, the first such
// clause on ties. Only positive literals produce tokens.
inline AlertTokens extract_tokens(const DnfLabel& label, const PredicateVocabulary& vocab) {
  AlertTokens tokens;
  if (label.clauses.empty()) return tokens;
  std::size_t dominant = 0;
  for (std::size_t i = 1; i < label.clauses.size(); ++i) {
    if (label.target_coverage[i] > label.target_coverage[dominant]) dominant = i;
  }
  const auto& clause = label.clauses[dominant];
  auto positive = [&](int i) { return ((clause.care >> i) & 1u) && ((clause.values >> i) & 1u); };

  for (int i = 0; i < vocab.size() && !tokens.object; ++i) {
    if (positive(i)) tokens.object = detail::object_word(vocab.name(i));
  }
  std::string direction;
  for (auto [name, word] : detail::kDirectionWords) {
    const int i = vocab.index_of(std::string(name));
    if (i < 0 || !positive(i)) continue;
    if (!direction.empty()) direction += ' ';
    direction += word;
  }
  if (!direction.empty()) tokens.direction = std::move(direction);
  return tokens;
}

// Missing tokens degrade a template to the one for the tokens present; with
// none present every b-modality says kFallbackAlert.
inline Explanation render(const AlertTokens& tokens, Modality modality, const ClusterSummary& cluster) {
  if (!cluster.flagged) throw Error("render needs a flagged cluster");
  Explanation e;
  e.modality = modality;
  e.cluster_id = cluster.cluster_id;
  e.probability = cluster.frequency;
  const auto& obj = tokens.object;
  const auto& dir = tokens.direction;

  switch (modality) {
    case Modality::generic:
      e.text = kGenericAlert;
      break;
    case Modality::object_only:
      e.object_token = obj;
      e.text = obj ? detail::capitalized(*obj) + "!" : std::string(kFallbackAlert);
      break;
    case Modality::direction_only:
      e.direction_token = dir;
      e.text = dir ? detail::capitalized(*dir) + "!" : std::string(kFallbackAlert);
      break;
    case Modality::object_direction:
      e.object_token = obj;
      e.direction_token = dir;
      if (obj && dir) {
        e.text = detail::capitalized(*obj) + ", " + *dir + "!";
      } else if (obj || dir) {
        e.text = detail::capitalized(obj ? *obj : *dir) + "!";
      } else {
        e.text = kFallbackAlert;
      }
      break;
    case Modality::full_sentence:
      e.object_token = obj;
      e.direction_token = dir;
      if (obj && dir) {
        e.text = "Handing over control: there is a " + *obj + " " + *dir + " of the vehicle.";
      } else if (obj) {
        e.text = "Handing over control: there is a " + *obj + " near the vehicle.";
      } else if (dir) {
        e.text = "Handing over control: there is a hazard " + *dir + " of the vehicle.";
      } else {
        e.text = kFallbackAlert;
      }
      break;
  }
  return e;
}

inline Explanation render(const DnfLabel& label, const PredicateVocabulary& vocab, Modality modality,
                          const ClusterSummary& cluster) {
  return render(extract_tokens(label, vocab), modality, cluster);
}

}  // namespace sentinel
