#pragma once

#include <string_view>

// Prompt templates used by the verifier, the reviewer, and the benchmark
// corruption generator. Placeholders use {name} syntax and are substituted
// by the rendering functions; treat the template text as frozen — scoring
// behavior of hosted judges is sensitive to wording.

namespace citegate::prompts {

inline constexpr std::string_view kVerifierTemplate =
    R"(You are a citation verification expert. Compare a citation from a report with its best matching source and assign a score from 0 to 10.

Scoring scale:
10: Perfect match -- citation exactly represents the source.
8-9: Near-perfect match with acceptable variations, including "et al.", display truncation, minor punctuation or formatting differences, or identical identifiers.
6-7: Minor metadata errors, but still identifiable as the same paper, such as author-name variations, a year off by 1-2 years, minor title-word changes, or small identifier errors.
4-5: Moderate issues, where the paper is related but has notable errors, such as multiple wrong author names, a year off by 3-5 years, or a partially changed title.
2-3: Major issues, where the citation describes a different paper or is heavily corrupted.
0-1: Complete fabrication or unrelated paper.

Important rules:
1. Ignore display truncation: "..." at the end of titles is display formatting, not a difference.
2. "et al." is acceptable and should not be treated as an author mismatch.
3. Minor punctuation, capitalization, and spacing differences are not hallucinations.
4. Compare only the citation and retrieved source metadata; do not infer missing fields.

Citation from report:
- Authors: {citation_authors}
- Year: {citation_year}
- Title: {citation_title}
- ArXiv ID: {citation_arxiv_id}
- URL: {citation_url}

Best matching source, matched by {match_method} with similarity score {similarity_score}:
{matched_info}

Context: {context}

Task: Compare the citation with the source and assign a score from 0 to 10. Provide a score, brief reasoning, and any key differences found.)";

inline constexpr std::string_view kReviewerTemplate =
    R"(You are a citation verification reviewer. Your job is to review the work of a first-pass verifier that compared a citation against its closest matching source paper.

The first-pass verifier sometimes makes mistakes: it over-relies on matching ArXiv identifiers or URLs and ignores the fact that the citation's title and authors are completely different from the source paper. A citation can have the correct URL/link but fabricated title, authors, or year --- that is a hallucination.

Classification definitions:
- exact_match: The citation correctly identifies the paper. Title, authors, and year are accurate or have only trivial formatting differences, such as "et al." or title truncation with "...".
- minor_hallucination: The citation refers to a recognizable paper but has noticeable metadata errors, such as a few wrong author names, a year off by 1-2 years, or minor title-word changes. The core identity of the paper is still clear.
- major_hallucination: The citation's title describes a completely different topic from the source, the authors are entirely different, or the citation appears to be fabricated. Even if the URL or identifier happens to point to a real paper, the citation text does not accurately describe that paper.

Key principle: A matching URL or ArXiv ID does not make a citation correct. If the citation's title is about a fundamentally different subject than the actual paper, it is a major_hallucination regardless of any identifier match.

A first-pass verifier compared this citation with its closest matching source and produced the verdict below. Please review whether the verdict is correct.

Citation from the report, raw text:
{citation_raw_text}

Parsed citation fields, which may be incomplete if parsing failed:
- Authors: {citation_authors}
- Year: {citation_year}
- Title: {citation_title}

Closest matching source, found via {match_source}:
- Authors: {source_authors}
- Year: {source_year}
- Title: {source_title}

Title similarity: {title_similarity}%

First-pass verifier verdict:
- Label: {verifier_label}
- Score: {verifier_score}/10
- Reasoning: {verifier_reasoning}

Your task: Do you agree with the verifier's classification? Focus on whether the citation's title and authors, as visible in the raw text above, accurately describe the source paper. A matching URL or identifier is not sufficient; the citation text itself must be accurate. Note that the parsed fields may be incomplete due to formatting, so always refer to the raw citation text as the ground truth for what the citation says.

Provide:
1. Your classification: one of exact_match, minor_hallucination, or major_hallucination.
2. Brief reasoning for your decision.)";

inline constexpr std::string_view kMinorCorruptionTemplate =
    R"(You are a citation corruption expert. Your task is to introduce MINOR hallucinations to academic citations, focusing primarily on METADATA CHANGES.

PRIMARY FOCUS - Metadata changes:
- Change author names, e.g., "Smith" -> "Johnson", "Zhang" -> "Wang", swap first/last names, add/remove middle initials.
- Change journal/publisher names to similar but different ones, e.g., "Nature" -> "Science", "IEEE" -> "ACM".
- Modify arXiv IDs, e.g., 2501.02387 -> 2503.15892.
- Change URL domains or paths, e.g., arxiv.org -> researchgate.net, different DOI numbers.
- Alter publisher locations or series information.
- Change publication years.

SECONDARY:
- You may also include very minor title adjustments, at most 1-2 words, if needed.

IMPORTANT:
- Focus on 1-3 metadata changes per citation.
- Keep changes realistic, like transcription errors or database inconsistencies.
- Preserve the overall format and structure.
- The title should remain mostly intact.
- For each citation, clearly describe what metadata you changed.

Return the results in the specified structured format.)";

inline constexpr std::string_view kMajorCorruptionTemplate =
    R"(You are a citation corruption expert. Your task is to introduce MAJOR hallucinations to academic citations. The corrupted citations must be entirely fabricated; they must NOT correspond to any real published paper.

These citations come from the subfield of "{subtopic}" within "{topic}".

PRIMARY FOCUS - Fabricate a new, non-existent title:
- Create the new title by blending terminology from two distinct subfields within the same broad academic domain, producing a research intersection that does not exist in reality.
- Include at least one fabricated proper noun in the title, such as a made-up method name, fictitious dataset, or non-existent benchmark. These names must be entirely invented.
- The fabricated title MUST NOT correspond to any real published paper.
- Do NOT recall or reproduce existing paper titles from training data.
- Take the original title's approximate length and syntactic structure, but replace every key noun phrase and technical term with a different, fabricated one from the same general field.

SECONDARY:
- Change author names using plausible but entirely fabricated names.
- Shift the year by 3-8 years.
- Replace arXiv IDs or DOIs with realistic-looking but fabricated identifiers.
- Replace journals, publishers, and URLs with plausible but non-functional alternatives.

IMPORTANT:
- The title change should be substantial and describe a non-existent paper.
- Make multiple changes per citation, with title fabrication as the most critical change.
- Keep the same broad academic field so the citation remains plausible in context.
- Preserve the citation format and structure.
- For each citation, clearly describe all changes made, emphasizing the title changes.

Return the results in the specified structured format.)";

}  // namespace citegate::prompts
