#pragma once

#include <string>
#include <vector>

namespace harmlens::text {

// Case/punctuation folding shared by subject merging and gold-standard
// matching. ASCII letters are lowercased, possessive suffixes ("'s", "s'")
// dropped, punctuation replaced by spaces, runs of whitespace collapsed.
// Non-ASCII UTF-8 bytes pass through untouched.
std::string fold(const std::string& input);

// fold() then split on spaces; plural-lite: a trailing 's' is dropped from
// tokens longer than three chars unless they end in "ss".
std::vector<std::string> fold_tokens(const std::string& input);

// True when `needle`'s folded tokens appear within `haystack`'s folded
// tokens in order (gaps allowed). Both-direction containment is the name
// equivalence used for merging.
bool token_subsequence(const std::vector<std::string>& needle,
                       const std::vector<std::string>& haystack);

// Folded equality or token containment in either direction.
bool names_equivalent(const std::string& a, const std::string& b);

std::string trim(const std::string& input);
std::string to_lower(std::string input);

}  // namespace harmlens::text
