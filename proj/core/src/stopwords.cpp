#include <string>
#include <unordered_set>
#include <vector>

namespace patchtrace {

namespace {

// Canonical English stop-word list; must stay byte-identical to
// data/stopwords.txt (one word per line, sorted).
constexpr const char* kStopWords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "did", "do", "does", "doing", "down", "during", "each",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here",
    "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it",
    "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
    "out", "over", "own", "s", "same", "she", "should", "so", "some", "such", "t", "than",
    "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
    "with", "you", "your", "yours", "yourself", "yourselves",
};

}  // namespace

const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> words(std::begin(kStopWords),
                                                       std::end(kStopWords));
    return words;
}

}  // namespace patchtrace
