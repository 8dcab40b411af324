#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dynarag/document.hpp"
#include "dynarag/trace.hpp"

namespace dynarag {

/// Raw template for a role, with {query}/{doc_content}/{max_id}/{observation}
/// placeholders still in place. Throws UnsupportedRole for RA, which has no
/// prompt (it is not a language role).
std::string_view prompt_template(Role role);

/// Renders candidate documents as "Document{i}: {text}" lines, indexed from 0.
std::string render_doc_content(const std::vector<Document>& docs);

/// Renders resolved (sub-question, answer) pairs for the summarizer.
std::string render_observation_block(const std::vector<QaPair>& pairs);

/// Substitutes the placeholders of the role's template from the observation.
/// Throws UnfilledPlaceholder when the query is blank or a placeholder has no
/// binding; unknown placeholders in a template are an error as well.
std::string render_prompt(Role role, const Observation& obs);

}  // namespace dynarag
