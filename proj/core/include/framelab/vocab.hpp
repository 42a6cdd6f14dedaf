#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "framelab/tokens.hpp"

namespace framelab {

// Closed toy vocabulary: structural tags, two-decimal second numerals on an
// integer grid, fps digits, choice letters, event-kind symbols, a small word
// list, and a background symbol. Off-grid numeric surfaces (frame timestamps)
// map to the nearest grid numeral id.
struct VocabSpec {
    int max_seconds = 120;
    int alphabet = 12;

    bool operator==(const VocabSpec& o) const {
        return max_seconds == o.max_seconds && alphabet == o.alphabet;
    }
};

enum class TokClass {
    Bos,
    ThinkOpen,
    ThinkClose,
    SpanOpen,
    SpanClose,
    FpsOpen,
    FpsClose,
    AnswerOpen,
    AnswerClose,
    VisionStart,
    VisionEnd,
    Dash,
    Letter,
    FpsDigit,
    Kind,
    Word,
    NumeralPolicy,
    TimestampInjected,
    Background,
    Other,
    Count,
};

class Vocab {
public:
    explicit Vocab(VocabSpec spec);

    int size() const { return static_cast<int>(surfaces_.size()); }
    const VocabSpec& spec() const { return spec_; }
    const std::string& surface(int id) const { return surfaces_[id]; }

    // Total: unknown surfaces fall back to the unk id, numbers to the grid.
    int id_of(const std::string& surface) const;
    int id_of_token(const Token& t) const { return id_of(t.surface); }

    TokClass class_of(const Token& t) const;

    int unk_id() const { return unk_id_; }
    int dash_id() const { return dash_id_; }
    int background_id() const { return background_id_; }
    int numeral_id(double seconds) const;
    int numeral_begin() const { return numeral_begin_; }
    int numeral_count() const { return spec_.max_seconds + 1; }
    double numeral_value(int id) const { return static_cast<double>(id - numeral_begin_); }
    bool is_numeral_id(int id) const {
        return id >= numeral_begin_ && id < numeral_begin_ + numeral_count();
    }
    int fps_id(int f) const { return fps_begin_ + (f - 1); }
    int fps_begin() const { return fps_begin_; }
    int letter_id(int idx) const { return letter_begin_ + idx; }
    int letter_begin() const { return letter_begin_; }
    int kind_id(int idx) const { return kind_begin_ + idx; }

    static std::string kind_symbol(int idx);
    static const std::vector<std::string>& word_list();
    static const std::vector<std::string>& letters();
    static constexpr const char* background_symbol() { return "blank"; }

private:
    VocabSpec spec_;
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, int> index_;
    int unk_id_ = 0;
    int dash_id_ = 0;
    int background_id_ = 0;
    int letter_begin_ = 0;
    int fps_begin_ = 0;
    int kind_begin_ = 0;
    int word_begin_ = 0;
    int numeral_begin_ = 0;
};

}  // namespace framelab
