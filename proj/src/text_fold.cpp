#include "harmlens/text_fold.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace harmlens::text {

namespace {

// UTF-8 sequences we normalize away before the ASCII pass: curly quotes and
// dash variants that show up in news text.
void replace_all(std::string& s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

std::string trim(const std::string& input) {
    size_t begin = 0;
    size_t end = input.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(input[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(input[end - 1]))) --end;
    return input.substr(begin, end - begin);
}

std::string to_lower(std::string input) {
    std::transform(input.begin(), input.end(), input.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return input;
}

std::string fold(const std::string& input) {
    std::string work = input;
    replace_all(work, "\xE2\x80\x99", "'");  // U+2019
    replace_all(work, "\xE2\x80\x98", "'");  // U+2018
    replace_all(work, "\xE2\x80\x9C", "\""); // U+201C
    replace_all(work, "\xE2\x80\x9D", "\""); // U+201D
    replace_all(work, "\xE2\x80\x93", "-");  // en dash
    replace_all(work, "\xE2\x80\x94", "-");  // em dash
    // possessives before punctuation stripping so "Yandex's" -> "yandex"
    replace_all(work, "'s ", " ");
    if (work.size() >= 2 && work.compare(work.size() - 2, 2, "'s") == 0) {
        work.erase(work.size() - 2);
    }
    replace_all(work, "s' ", "s ");

    std::string out;
    out.reserve(work.size());
    bool last_space = true;
    for (unsigned char c : work) {
        if (c >= 0x80) {  // keep UTF-8 continuation/lead bytes verbatim
            out.push_back(static_cast<char>(c));
            last_space = false;
            continue;
        }
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
            last_space = false;
        } else if (!last_space) {
            out.push_back(' ');
            last_space = true;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<std::string> fold_tokens(const std::string& input) {
    std::vector<std::string> tokens;
    std::istringstream stream(fold(input));
    std::string token;
    while (stream >> token) {
        if (token.size() > 3 && token.back() == 's' && token[token.size() - 2] != 's') {
            token.pop_back();
        }
        tokens.push_back(token);
    }
    return tokens;
}

bool token_subsequence(const std::vector<std::string>& needle,
                       const std::vector<std::string>& haystack) {
    if (needle.empty()) return false;
    size_t i = 0;
    for (const auto& tok : haystack) {
        if (i < needle.size() && needle[i] == tok) ++i;
    }
    return i == needle.size();
}

bool names_equivalent(const std::string& a, const std::string& b) {
    const std::string fa = fold(a);
    const std::string fb = fold(b);
    if (fa.empty() || fb.empty()) return false;
    if (fa == fb) return true;
    const auto ta = fold_tokens(a);
    const auto tb = fold_tokens(b);
    return token_subsequence(ta, tb) || token_subsequence(tb, ta);
}

}  // namespace harmlens::text
