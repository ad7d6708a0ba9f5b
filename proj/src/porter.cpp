// Porter stemmer with the NLTK_EXTENSIONS refinements. Rule lists follow
// the "first matching suffix decides" convention: when the suffix matches
// but its condition fails, the word is returned unchanged.

#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mred/text.hpp"

namespace mred::text {

namespace {

bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_consonant(std::string_view w, std::size_t i) {
    if (is_vowel_letter(w[i])) return false;
    if (w[i] == 'y') {
        bool negate = false;
        while (i > 0 && w[i] == 'y') {
            negate = !negate;
            --i;
        }
        return (!is_vowel_letter(w[i])) != negate;
    }
    return true;
}

std::vector<bool> consonant_flags(std::string_view w) {
    std::vector<bool> flags(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_vowel_letter(w[i]))
            flags[i] = false;
        else if (w[i] == 'y')
            flags[i] = i == 0 ? true : !flags[i - 1];
        else
            flags[i] = true;
    }
    return flags;
}

int measure(std::string_view stem) {
    auto flags = consonant_flags(stem);
    int m = 0;
    for (std::size_t i = 1; i < flags.size(); ++i) {
        if (!flags[i - 1] && flags[i]) ++m;
    }
    return m;
}

bool positive_measure(std::string_view stem) { return measure(stem) > 0; }

bool contains_vowel(std::string_view stem) {
    for (bool c : consonant_flags(stem))
        if (!c) return true;
    return false;
}

bool ends_double_consonant(std::string_view w) {
    return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] && is_consonant(w, w.size() - 1);
}

bool ends_cvc(std::string_view w) {
    const auto n = w.size();
    if (n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) &&
        w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y')
        return true;
    return n == 2 && !is_consonant(w, 0) && is_consonant(w, 1);
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
    std::string_view suffix;  // "*d" = double-consonant pseudo-suffix
    std::string replacement;
    std::function<bool(std::string_view)> condition;  // empty = unconditional
};

std::string apply_rules(const std::string& word, const std::vector<Rule>& rules) {
    for (const auto& rule : rules) {
        if (rule.suffix == "*d" && ends_double_consonant(word)) {
            std::string stem = word.substr(0, word.size() - 2);
            if (!rule.condition || rule.condition(stem)) return stem + rule.replacement;
            return word;
        }
        if (ends_with(word, rule.suffix)) {
            std::string stem = word.substr(0, word.size() - rule.suffix.size());
            if (!rule.condition || rule.condition(stem)) return stem + rule.replacement;
            return word;
        }
    }
    return word;
}

std::string replace_suffix(const std::string& w, std::string_view suffix, std::string_view rep) {
    return w.substr(0, w.size() - suffix.size()) + std::string(rep);
}

std::string step1a(const std::string& w) {
    if (ends_with(w, "ies") && w.size() == 4) return replace_suffix(w, "ies", "ie");
    return apply_rules(w, {{"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}}});
}

std::string step1b(const std::string& w) {
    if (ends_with(w, "ied")) return replace_suffix(w, "ied", w.size() == 4 ? "ie" : "i");
    if (ends_with(w, "eed")) {
        std::string stem = replace_suffix(w, "eed", "");
        return measure(stem) > 0 ? stem + "ee" : w;
    }
    std::string inter;
    bool ok = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (ends_with(w, suffix)) {
            inter = replace_suffix(w, suffix, "");
            if (contains_vowel(inter)) {
                ok = true;
                break;
            }
        }
    }
    if (!ok) return w;
    const char last = inter.empty() ? '\0' : inter.back();
    return apply_rules(inter, {
                                  {"at", "ate", {}},
                                  {"bl", "ble", {}},
                                  {"iz", "ize", {}},
                                  {"*d", std::string(1, last),
                                   [last](std::string_view) { return last != 'l' && last != 's' && last != 'z'; }},
                                  {"", "e", [](std::string_view s) { return measure(s) == 1 && ends_cvc(s); }},
                              });
}

std::string step1c(const std::string& w) {
    return apply_rules(w, {{"y", "i", [](std::string_view s) {
                                return s.size() > 1 && is_consonant(s, s.size() - 1);
                            }}});
}

std::string step2(const std::string& w) {
    if (ends_with(w, "alli") && positive_measure(replace_suffix(w, "alli", "")))
        return step2(replace_suffix(w, "alli", "al"));
    auto pm = [](std::string_view s) { return positive_measure(s); };
    std::vector<Rule> rules = {
        {"ational", "ate", pm}, {"tional", "tion", pm}, {"enci", "ence", pm},   {"anci", "ance", pm},
        {"izer", "ize", pm},    {"bli", "ble", pm},     {"alli", "al", pm},     {"entli", "ent", pm},
        {"eli", "e", pm},       {"ousli", "ous", pm},   {"ization", "ize", pm}, {"ation", "ate", pm},
        {"ator", "ate", pm},    {"alism", "al", pm},    {"iveness", "ive", pm}, {"fulness", "ful", pm},
        {"ousness", "ous", pm}, {"aliti", "al", pm},    {"iviti", "ive", pm},   {"biliti", "ble", pm},
        {"fulli", "ful", pm},
        {"logi", "log", [&w](std::string_view) { return positive_measure(std::string_view(w).substr(0, w.size() - 3)); }},
    };
    return apply_rules(w, rules);
}

std::string step3(const std::string& w) {
    auto pm = [](std::string_view s) { return positive_measure(s); };
    return apply_rules(w, {{"icate", "ic", pm},
                           {"ative", "", pm},
                           {"alize", "al", pm},
                           {"iciti", "ic", pm},
                           {"ical", "ic", pm},
                           {"ful", "", pm},
                           {"ness", "", pm}});
}

std::string step4(const std::string& w) {
    auto gt1 = [](std::string_view s) { return measure(s) > 1; };
    return apply_rules(w, {{"al", "", gt1},
                           {"ance", "", gt1},
                           {"ence", "", gt1},
                           {"er", "", gt1},
                           {"ic", "", gt1},
                           {"able", "", gt1},
                           {"ible", "", gt1},
                           {"ant", "", gt1},
                           {"ement", "", gt1},
                           {"ment", "", gt1},
                           {"ent", "", gt1},
                           {"ion", "",
                            [](std::string_view s) {
                                return measure(s) > 1 && !s.empty() && (s.back() == 's' || s.back() == 't');
                            }},
                           {"ou", "", gt1},
                           {"ism", "", gt1},
                           {"ate", "", gt1},
                           {"iti", "", gt1},
                           {"ous", "", gt1},
                           {"ive", "", gt1},
                           {"ize", "", gt1}});
}

std::string step5a(const std::string& w) {
    if (ends_with(w, "e")) {
        std::string stem = replace_suffix(w, "e", "");
        const int m = measure(stem);
        if (m > 1) return stem;
        if (m == 1 && !ends_cvc(stem)) return stem;
    }
    return w;
}

std::string step5b(const std::string& w) {
    return apply_rules(w, {{"ll", "l", [&w](std::string_view) {
                                return measure(std::string_view(w).substr(0, w.size() - 1)) > 1;
                            }}});
}

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
    static const std::unordered_map<std::string_view, std::string_view> pool = {
        {"sky", "sky"},         {"skies", "sky"},     {"dying", "die"},     {"lying", "lie"},
        {"tying", "tie"},       {"news", "news"},     {"innings", "inning"}, {"inning", "inning"},
        {"outings", "outing"},  {"outing", "outing"}, {"cannings", "canning"}, {"canning", "canning"},
        {"howe", "howe"},       {"proceed", "proceed"}, {"exceed", "exceed"}, {"succeed", "succeed"},
    };
    return pool;
}

}  // namespace

std::string porter_stem(std::string_view word) {
    std::string w(word);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto& pool = irregular_forms();
    if (auto it = pool.find(w); it != pool.end()) return std::string(it->second);
    if (w.size() <= 2) return w;
    w = step1a(w);
    w = step1b(w);
    w = step1c(w);
    w = step2(w);
    w = step3(w);
    w = step4(w);
    w = step5a(w);
    w = step5b(w);
    return w;
}

}  // namespace mred::text
