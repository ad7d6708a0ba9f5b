#include "mred/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_set>

#include "mred/error.hpp"
#include "mred/random.hpp"
#include "mred/text.hpp"

namespace mred::corpus {

using nlohmann::json;

std::vector<Category> MetaReview::labels() const {
    std::vector<Category> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(s.label);
    return out;
}

std::string MetaReview::text() const {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out.push_back(' ');
        out += s.text;
    }
    return out;
}

std::string_view split_name(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "validation" || s == "val" || s == "dev") return Split::validation;
    if (s == "test") return Split::test;
    if (s == "unassigned") return Split::unassigned;
    throw Error("bad_split", "unknown split '" + std::string(s) + "'");
}

std::optional<double> Submission::average_rating() const {
    double sum = 0;
    int n = 0;
    for (const auto& r : reviews) {
        if (r.rating) {
            sum += *r.rating;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::size_t Corpus::review_count() const {
    std::size_t n = 0;
    for (const auto& s : submissions) n += s.reviews.size();
    return n;
}

std::size_t Corpus::sentence_count() const {
    std::size_t n = 0;
    for (const auto& s : submissions) n += s.meta_review.sentences.size();
    return n;
}

std::vector<const Submission*> Corpus::split(Split which) const {
    std::vector<const Submission*> out;
    for (const auto& s : submissions)
        if (s.split == which) out.push_back(&s);
    return out;
}

const Submission* Corpus::find(std::string_view id) const {
    for (const auto& s : submissions)
        if (s.id == id) return &s;
    return nullptr;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const Submission& s) {
    json reviews = json::array();
    for (const auto& r : s.reviews) {
        reviews.push_back({
            {"reviewer_id", r.reviewer_id},
            {"text", r.text},
            {"rating", r.rating ? json(*r.rating) : json(nullptr)},
            {"confidence", r.confidence ? json(*r.confidence) : json(nullptr)},
        });
    }
    json meta = json::array();
    for (const auto& sent : s.meta_review.sentences)
        meta.push_back({{"text", sent.text}, {"label", storage_name(sent.label)}});
    json out = {
        {"id", s.id},
        {"year", s.year},
        {"decision", decision_name(s.meta_review.decision)},
        {"reviews", std::move(reviews)},
        {"meta_review", std::move(meta)},
    };
    if (s.split != Split::unassigned) out["split"] = split_name(s.split);
    return out;
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error("malformed_record", what); }

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) malformed(std::string("missing field '") + name + "'");
    return *it;
}

std::string string_field(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::optional<int> optional_int(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) malformed(std::string("field '") + name + "' must be an integer or null");
    return it->get<int>();
}

}  // namespace

Submission submission_from_json(const json& j) {
    if (!j.is_object()) malformed("record is not a JSON object");
    Submission s;
    s.id = string_field(j, "id");
    if (s.id.empty()) malformed("empty submission id");
    const auto& year = field(j, "year");
    if (!year.is_number_integer()) malformed("field 'year' must be an integer");
    s.year = year.get<int>();
    if (s.year < kFirstYear || s.year > kLastYear)
        malformed("year " + std::to_string(s.year) + " outside [2018, 2021]");
    try {
        s.meta_review.decision = parse_decision(string_field(j, "decision"));
    } catch (const Error& e) {
        malformed(e.what());
    }

    const auto& reviews = field(j, "reviews");
    if (!reviews.is_array() || reviews.empty()) malformed("'reviews' must be a nonempty array");
    for (const auto& rj : reviews) {
        if (!rj.is_object()) malformed("review is not an object");
        Review r;
        r.reviewer_id = string_field(rj, "reviewer_id");
        r.text = string_field(rj, "text");
        if (text::trim(r.text).empty()) malformed("review '" + r.reviewer_id + "' has empty text");
        r.rating = optional_int(rj, "rating");
        if (r.rating && (*r.rating < kMinRating || *r.rating > kMaxRating))
            malformed("rating " + std::to_string(*r.rating) + " outside [1, 10]");
        r.confidence = optional_int(rj, "confidence");
        s.reviews.push_back(std::move(r));
    }

    const auto& meta = field(j, "meta_review");
    if (!meta.is_array() || meta.empty()) malformed("'meta_review' must be a nonempty array");
    for (const auto& mj : meta) {
        if (!mj.is_object()) malformed("meta-review sentence is not an object");
        LabeledSentence ls;
        ls.text = string_field(mj, "text");
        if (text::trim(ls.text).empty()) malformed("empty meta-review sentence");
        ls.label = parse_category(string_field(mj, "label"));
        s.meta_review.sentences.push_back(std::move(ls));
    }

    if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) malformed("field 'split' must be a string");
        try {
            s.split = parse_split(it->get<std::string>());
        } catch (const Error& e) {
            malformed(e.what());
        }
    }
    return s;
}

Corpus read_corpus(std::istream& in, std::string source) {
    Corpus corpus;
    corpus.provenance.source = std::move(source);
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = corpus.provenance.source + ":" + std::to_string(line_no) + ": ";
        Submission s;
        try {
            s = submission_from_json(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error("malformed_record", where + "invalid JSON: " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        }
        if (!ids.insert(s.id).second) throw Error("duplicate_id", where + "duplicate submission id '" + s.id + "'");
        corpus.submissions.push_back(std::move(s));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open corpus file " + path.string());
    return read_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& s : corpus.submissions) out << to_json(s).dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write corpus file " + path.string());
    write_corpus(out, corpus);
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("MRED_DATA_DIR"); env && *env) return env;
    return "data";
}

// ---------------------------------------------------------------------------
// Sentence segmentation

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

constexpr std::string_view kLeftDq = "\xE2\x80\x9C";   // U+201C
constexpr std::string_view kRightDq = "\xE2\x80\x9D";  // U+201D

bool starts_with_at(std::string_view s, std::size_t i, std::string_view p) {
    return s.size() >= i + p.size() && s.substr(i, p.size()) == p;
}

bool guarded_abbreviation(std::string_view token) {
    static const std::unordered_set<std::string> guards = {
        "e.g.", "i.e.", "fig.", "figs.", "eq.",  "eqs.",  "dr.",   "vs.",    "al.",  "cf.",
        "sec.", "secs.", "tab.", "mr.",  "mrs.", "ms.",   "prof.", "approx.", "resp.", "ref.",
        "refs.", "appx.", "vol.", "pp.",  "ch.",  "w.r.t.", "a.k.a.", "st.",  "jr.",  "no.",
        "thm.", "lem.",  "def.", "prop.", "alg.", "v.s.",  "et.",  "etc.)",
    };
    // Strip leading punctuation such as "(" or quotes.
    std::size_t b = 0;
    while (b < token.size() && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
    std::string lower;
    for (char c : token.substr(b)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return guards.contains(lower);
}

/// Blank line starting at `i` (which must be '\n'): returns the index just
/// past it, or npos.
std::size_t blank_line_end(std::string_view s, std::size_t i) {
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
    if (j < s.size() && s[j] == '\n') return j + 1;
    return std::string_view::npos;
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        auto piece = text::trim(text.substr(b, e - b));
        if (!piece.empty()) out.emplace_back(piece);
    };

    std::size_t start = 0;
    int depth = 0;      // () and []
    int curly = 0;      // curly double quotes
    bool straight = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            if (auto e = blank_line_end(text, i); e != std::string_view::npos) {
                emit(start, i);
                start = e;
                i = e;
                depth = curly = 0;
                straight = false;
                continue;
            }
        }
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') depth = std::max(0, depth - 1);
        else if (c == '"') straight = !straight;
        else if (starts_with_at(text, i, kLeftDq)) {
            ++curly;
            i += kLeftDq.size();
            continue;
        } else if (starts_with_at(text, i, kRightDq)) {
            curly = std::max(0, curly - 1);
            i += kRightDq.size();
            continue;
        }

        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }

        // Consume further terminators and closers, simulating their effect
        // on the nesting state.
        std::size_t j = i + 1;
        int d = depth, q = curly;
        bool st = straight;
        while (j < text.size()) {
            const char n = text[j];
            if (n == '.' || n == '!' || n == '?' || n == '\'') { ++j; continue; }
            if (n == ')' || n == ']') { d = std::max(0, d - 1); ++j; continue; }
            if (n == '"' && st) { st = false; ++j; continue; }
            if (starts_with_at(text, j, kRightDq)) { q = std::max(0, q - 1); j += kRightDq.size(); continue; }
            break;
        }
        bool boundary = d == 0 && q == 0 && !st && j < text.size() && is_space(text[j]);
        if (boundary) {
            std::size_t k = j;
            while (k < text.size() && is_space(text[k])) ++k;
            // Allow an opening bracket or quote before the capital.
            std::size_t cap = k;
            if (cap < text.size() && (text[cap] == '(' || text[cap] == '"' || text[cap] == '[')) ++cap;
            else if (starts_with_at(text, cap, kLeftDq)) cap += kLeftDq.size();
            boundary = cap < text.size() && is_upper(text[cap]);
        }
        if (boundary && c == '.') {
            std::size_t tb = i;
            while (tb > start && !is_space(text[tb - 1])) --tb;
            if (guarded_abbreviation(text.substr(tb, i + 1 - tb))) boundary = false;
        }
        if (boundary) {
            emit(start, j);
            start = j;
            depth = d;
            curly = q;
            straight = st;
        }
        i = j;
    }
    emit(start, text.size());
    return out;
}

std::vector<std::string> split_paragraphs(std::string_view text) {
    std::vector<std::string> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        auto piece = text::trim(text.substr(b, e - b));
        if (piece.empty()) return;
        std::string para;
        para.reserve(piece.size());
        bool pending_space = false;
        for (char c : piece) {
            if (c == '\n' || c == '\r') {
                pending_space = true;
                continue;
            }
            if (pending_space) {
                if (!para.empty() && para.back() != ' ') para.push_back(' ');
                pending_space = false;
                if (c == ' ') continue;
            }
            para.push_back(c);
        }
        out.push_back(std::move(para));
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\n') continue;
        if (auto e = blank_line_end(text, i); e != std::string_view::npos) {
            emit(start, i);
            start = e;
            i = e - 1;
        }
    }
    emit(start, text.size());
    return out;
}

std::vector<std::string> review_sentences(const Review& review) {
    std::vector<std::string> out;
    for (const auto& para : split_paragraphs(review.text)) {
        auto sents = segment_sentences(para);
        std::move(sents.begin(), sents.end(), std::back_inserter(out));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Filtering and splitting

Corpus filter_and_split(const Corpus& corpus, const SplitOptions& options, SplitReport* report) {
    if (options.min_words > options.max_words)
        throw Error("bad_options", "min_words must not exceed max_words");
    const unsigned ratio_sum = options.ratio[0] + options.ratio[1] + options.ratio[2];
    if (options.ratio[0] == 0 || options.ratio[1] == 0 || options.ratio[2] == 0)
        throw Error("bad_options", "split ratio components must be positive");

    Corpus out;
    out.provenance = corpus.provenance;
    for (const auto& s : corpus.submissions) {
        const std::size_t wc = text::word_count(s.meta_review.text());
        if (wc >= options.min_words && wc <= options.max_words) out.submissions.push_back(s);
    }
    const std::size_t n = out.submissions.size();
    if (n < 10)
        throw Error("split_too_small",
                    "only " + std::to_string(n) + " submissions survive filtering; at least 10 are required");

    std::sort(out.submissions.begin(), out.submissions.end(),
              [](const Submission& a, const Submission& b) { return a.id < b.id; });

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(options.seed);
    portable_shuffle(order, rng);

    const std::size_t n_train = n * options.ratio[0] / ratio_sum;
    const std::size_t n_val = n * options.ratio[1] / ratio_sum;
    for (std::size_t rank = 0; rank < n; ++rank) {
        auto& s = out.submissions[order[rank]];
        s.split = rank < n_train ? Split::train : rank < n_train + n_val ? Split::validation : Split::test;
    }

    if (report) {
        report->input = corpus.submissions.size();
        report->kept = n;
        report->train = n_train;
        report->validation = n_val;
        report->test = n - n_train - n_val;
    }
    return out;
}

}  // namespace mred::corpus
