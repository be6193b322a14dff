// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edit {

enum class PromptId { QaBrief, KbOrganize, Integrate, Respond, CoqBootstrap, LlmCompareQg, Gpt4Judge };

std::string_view to_string(PromptId id);
PromptId prompt_id_from_string(std::string_view text);

struct PromptTemplate {
  PromptId id;
  std::string_view text;  // with {slot} placeholders
  std::vector<std::string_view> required_slots;
};

/// Frozen template registry. Wording is kept verbatim, typos included;
/// only the slot names are normalized.
std::span<const PromptTemplate> prompt_templates();
const PromptTemplate& prompt_template(PromptId id);

using SlotMap = std::map<std::string, std::string, std::less<>>;

/// Substitutes every {slot} of the template. Throws MissingSlot when a
/// required slot is absent and UnknownSlot for any extra key. Substituted
/// values are not rescanned for placeholders.
std::string render_prompt(PromptId id, const SlotMap& slots);

}  // namespace edit
