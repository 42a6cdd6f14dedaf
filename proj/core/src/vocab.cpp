#include "framelab/vocab.hpp"

#include <cmath>
#include <cstdio>

namespace framelab {

namespace {
const std::vector<std::string> kWords = {
    "which", "event", "between", "and", "duration", "choices", "locate",
    "around", "static", "moderate", "rapid", "check", "window", "target",
    "evidence", "observe", "scan", "frames", "review", "density",
};
const std::vector<std::string> kLetters = {"A", "B", "C", "D"};
}  // namespace

std::string Vocab::kind_symbol(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "k%02d", idx);
    return buf;
}

const std::vector<std::string>& Vocab::word_list() { return kWords; }
const std::vector<std::string>& Vocab::letters() { return kLetters; }

Vocab::Vocab(VocabSpec spec) : spec_(spec) {
    auto push = [&](const std::string& s) {
        index_.emplace(s, static_cast<int>(surfaces_.size()));
        surfaces_.push_back(s);
        return static_cast<int>(surfaces_.size()) - 1;
    };
    for (const auto& tag : known_tags()) push(tag);
    dash_id_ = push("-");
    unk_id_ = push("<unk>");
    background_id_ = push(background_symbol());
    letter_begin_ = static_cast<int>(surfaces_.size());
    for (const auto& l : kLetters) push(l);
    fps_begin_ = static_cast<int>(surfaces_.size());
    for (int f = 1; f <= 6; ++f) push(std::to_string(f));
    kind_begin_ = static_cast<int>(surfaces_.size());
    for (int k = 0; k < spec_.alphabet; ++k) push(kind_symbol(k));
    word_begin_ = static_cast<int>(surfaces_.size());
    for (const auto& w : kWords) push(w);
    numeral_begin_ = static_cast<int>(surfaces_.size());
    for (int s = 0; s <= spec_.max_seconds; ++s) push(format_seconds(static_cast<double>(s)));
}

int Vocab::numeral_id(double seconds) const {
    long v = std::lround(seconds);
    if (v < 0) v = 0;
    if (v > spec_.max_seconds) v = spec_.max_seconds;
    return numeral_begin_ + static_cast<int>(v);
}

int Vocab::id_of(const std::string& surface) const {
    auto it = index_.find(surface);
    if (it != index_.end()) return it->second;
    // Numeric surfaces off the grid (frame timestamps, odd decimals).
    bool digits = false, ok = true;
    int dots = 0;
    for (char c : surface) {
        if (c >= '0' && c <= '9') {
            digits = true;
        } else if (c == '.') {
            ++dots;
        } else {
            ok = false;
            break;
        }
    }
    if (ok && digits && dots <= 1) return numeral_id(std::strtod(surface.c_str(), nullptr));
    return unk_id_;
}

TokClass Vocab::class_of(const Token& t) const {
    const std::string& s = t.surface;
    if (s == "<think>") return TokClass::ThinkOpen;
    if (s == "</think>") return TokClass::ThinkClose;
    if (s == "<span>") return TokClass::SpanOpen;
    if (s == "</span>") return TokClass::SpanClose;
    if (s == "<fps>") return TokClass::FpsOpen;
    if (s == "</fps>") return TokClass::FpsClose;
    if (s == "<answer>") return TokClass::AnswerOpen;
    if (s == "</answer>") return TokClass::AnswerClose;
    if (s == "<|vision_start|>") return TokClass::VisionStart;
    if (s == "<|vision_end|>") return TokClass::VisionEnd;
    if (s == "-") return TokClass::Dash;
    if (s == background_symbol()) return TokClass::Background;
    int id = id_of(s);
    if (id >= letter_begin_ && id < letter_begin_ + static_cast<int>(kLetters.size()))
        return TokClass::Letter;
    if (id >= fps_begin_ && id < fps_begin_ + 6) return TokClass::FpsDigit;
    if (id >= kind_begin_ && id < kind_begin_ + spec_.alphabet) return TokClass::Kind;
    if (id >= word_begin_ && id < numeral_begin_) return TokClass::Word;
    if (is_numeral_id(id))
        return t.origin == Origin::Injected ? TokClass::TimestampInjected : TokClass::NumeralPolicy;
    return TokClass::Other;
}

}  // namespace framelab
