#include "framelab/tokens.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace framelab {

namespace {

const std::vector<std::string> kTags = {
    "<think>", "</think>", "<span>", "</span>", "<fps>", "</fps>",
    "<answer>", "</answer>", "<|vision_start|>", "<|vision_end|>",
};

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Longest tag match starting at text[pos], or empty.
std::string tag_at(const std::string& text, std::size_t pos) {
    if (pos >= text.size() || text[pos] != '<') return {};
    std::string best;
    for (const auto& tag : kTags) {
        if (text.compare(pos, tag.size(), tag) == 0 && tag.size() > best.size()) best = tag;
    }
    return best;
}

bool all_digits(const std::string& s, std::size_t b, std::size_t e) {
    if (b >= e) return false;
    for (std::size_t i = b; i < e; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool is_plain_int(const std::string& s) { return all_digits(s, 0, s.size()); }

bool is_number_like(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return is_plain_int(s);
    return all_digits(s, 0, dot) && all_digits(s, dot + 1, s.size());
}

bool is_two_decimal(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0) return false;
    return all_digits(s, 0, dot) && s.size() == dot + 3 && all_digits(s, dot + 1, s.size());
}

std::optional<double> parse_number(const std::string& s) {
    if (!is_number_like(s)) return std::nullopt;
    auto dot = s.find('.');
    if (dot == std::string::npos) return static_cast<double>(std::strtoll(s.c_str(), nullptr, 10));
    double whole = static_cast<double>(std::strtoll(s.substr(0, dot).c_str(), nullptr, 10));
    std::string frac = s.substr(dot + 1);
    double scale = 1.0;
    double f = 0.0;
    for (char c : frac) {
        scale *= 10.0;
        f = f * 10.0 + (c - '0');
    }
    return whole + f / scale;
}

struct Lexeme {
    std::string surface;
    bool space_before;
};

std::vector<Lexeme> lex(const std::string& text) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    bool pending_space = false;
    while (i < text.size()) {
        if (is_ws(text[i])) {
            pending_space = true;
            ++i;
            continue;
        }
        std::string tag = tag_at(text, i);
        if (!tag.empty()) {
            out.push_back({tag, pending_space});
            pending_space = false;
            i += tag.size();
            continue;
        }
        std::size_t b = i;
        while (i < text.size() && !is_ws(text[i]) && tag_at(text, i).empty()) ++i;
        out.push_back({text.substr(b, i - b), pending_space});
        pending_space = false;
    }
    return out;
}

}  // namespace

const std::vector<std::string>& known_tags() { return kTags; }

bool is_known_tag(const std::string& s) {
    return std::find(kTags.begin(), kTags.end(), s) != kTags.end();
}

void assign_roles(std::vector<Token>& tokens, std::optional<std::size_t>& t_fps) {
    const std::size_t n = tokens.size();
    for (auto& t : tokens) t.role = Role::Text;
    t_fps.reset();

    // Vision blocks: <|vision_start|> nontag* <|vision_end|>
    for (std::size_t i = 0; i < n; ++i) {
        if (tokens[i].surface != "<|vision_start|>") continue;
        std::size_t j = i + 1;
        while (j < n && !is_known_tag(tokens[j].surface)) ++j;
        if (j < n && tokens[j].surface == "<|vision_end|>") {
            tokens[i].role = Role::VisionStart;
            tokens[j].role = Role::VisionEnd;
            for (std::size_t k = i + 1; k < j; ++k) tokens[k].role = Role::FrameContent;
            i = j;
        }
    }

    // A two-decimal number immediately before a vision block is its timestamp.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (tokens[i].role == Role::Text && tokens[i + 1].role == Role::VisionStart &&
            is_two_decimal(tokens[i].surface)) {
            tokens[i].role = Role::Timestamp;
        }
    }

    // <span> NUM - NUM </span>
    for (std::size_t i = 0; i + 4 < n; ++i) {
        if (tokens[i].surface == "<span>" && tokens[i].role == Role::Text &&
            tokens[i + 1].role == Role::Text && is_number_like(tokens[i + 1].surface) &&
            tokens[i + 2].role == Role::Text && tokens[i + 2].surface == "-" &&
            tokens[i + 3].role == Role::Text && is_number_like(tokens[i + 3].surface) &&
            tokens[i + 4].surface == "</span>" && tokens[i + 4].role == Role::Text) {
            tokens[i].role = Role::SpanOpen;
            tokens[i + 1].role = Role::Numeral;
            tokens[i + 3].role = Role::Numeral;
            tokens[i + 4].role = Role::SpanClose;
            i += 4;
        }
    }

    // <fps> INT </fps>
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (tokens[i].surface == "<fps>" && tokens[i].role == Role::Text &&
            tokens[i + 1].role == Role::Text && is_plain_int(tokens[i + 1].surface) &&
            tokens[i + 2].surface == "</fps>" && tokens[i + 2].role == Role::Text) {
            tokens[i].role = Role::FpsOpen;
            tokens[i + 1].role = Role::Numeral;
            tokens[i + 2].role = Role::FpsClose;
            i += 2;
        }
    }

    // Greedy open/close pairing for think and answer.
    auto pair_tags = [&](const char* open_s, const char* close_s, Role open_r, Role close_r) {
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (tokens[i].surface != open_s || tokens[i].role != Role::Text) continue;
            std::size_t j = std::max(cursor, i + 1);
            while (j < n && !(tokens[j].surface == close_s && tokens[j].role == Role::Text)) ++j;
            if (j < n) {
                tokens[i].role = open_r;
                tokens[j].role = close_r;
                cursor = j + 1;
                i = j;
            }
        }
    };
    pair_tags("<think>", "</think>", Role::ThinkOpen, Role::ThinkClose);
    pair_tags("<answer>", "</answer>", Role::AnswerOpen, Role::AnswerClose);

    // Interval answers: <answer> NUM - NUM </answer>
    for (std::size_t i = 0; i + 4 < n; ++i) {
        if (tokens[i].role == Role::AnswerOpen && tokens[i + 4].role == Role::AnswerClose &&
            tokens[i + 1].role == Role::Text && is_number_like(tokens[i + 1].surface) &&
            tokens[i + 2].surface == "-" && tokens[i + 2].role == Role::Text &&
            tokens[i + 3].role == Role::Text && is_number_like(tokens[i + 3].surface)) {
            tokens[i + 1].role = Role::Numeral;
            tokens[i + 3].role = Role::Numeral;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (tokens[i].role == Role::FpsClose) {
            t_fps = i;
            break;
        }
    }
}

TokenStream parse(const std::string& text, Origin default_origin) {
    TokenStream s;
    for (auto& lx : lex(text)) {
        Token t;
        t.surface = std::move(lx.surface);
        t.space_before = lx.space_before;
        t.origin = default_origin;
        s.tokens.push_back(std::move(t));
    }
    assign_roles(s.tokens, s.t_fps);
    for (auto& t : s.tokens) {
        switch (t.role) {
            case Role::Timestamp:
            case Role::VisionStart:
            case Role::VisionEnd:
            case Role::FrameContent:
                t.origin = Origin::Injected;
                break;
            default:
                break;
        }
    }
    return s;
}

std::string serialize(const TokenStream& stream) {
    std::string out;
    for (const auto& t : stream.tokens) {
        if (t.space_before) out += ' ';
        out += t.surface;
    }
    return out;
}

SegmentSplit split_segments(const TokenStream& stream) {
    SegmentSplit s;
    const std::size_t n = stream.tokens.size();
    if (stream.t_fps.has_value()) {
        s.sampling_begin = 0;
        s.sampling_end = *stream.t_fps + 1;
        s.reasoning_begin = s.sampling_end;
        s.reasoning_end = n;
    } else {
        s.sampling_begin = s.sampling_end = 0;
        s.reasoning_begin = 0;
        s.reasoning_end = n;
    }
    return s;
}

std::optional<RetrievalCommand> parse_retrieval_command(const TokenStream& stream) {
    if (!stream.t_fps.has_value()) return std::nullopt;
    const auto& toks = stream.tokens;
    std::size_t fps_close = *stream.t_fps;
    std::optional<std::size_t> span_close;
    for (std::size_t i = 0; i < fps_close; ++i) {
        if (toks[i].role == Role::SpanClose) span_close = i;
    }
    if (!span_close.has_value()) return std::nullopt;
    RetrievalCommand cmd;
    auto ts = parse_number(toks[*span_close - 3].surface);
    auto te = parse_number(toks[*span_close - 1].surface);
    auto f = parse_number(toks[fps_close - 1].surface);
    if (!ts || !te || !f) return std::nullopt;
    cmd.t_s = *ts;
    cmd.t_e = *te;
    cmd.f = static_cast<int>(*f);
    return cmd;
}

ExtractedAnswer extract_answer(const TokenStream& stream) {
    ExtractedAnswer ans;
    const auto& toks = stream.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].role != Role::AnswerOpen) continue;
        std::size_t j = i + 1;
        while (j < toks.size() && toks[j].role != Role::AnswerClose) ++j;
        if (j >= toks.size()) break;
        std::size_t count = j - i - 1;
        if (count == 1) {
            ans.kind = ExtractedAnswer::Kind::Symbol;
            ans.symbol = toks[i + 1].surface;
        } else if (count == 3 && toks[i + 2].surface == "-") {
            auto a = parse_number(toks[i + 1].surface);
            auto b = parse_number(toks[i + 3].surface);
            if (a && b) {
                ans.kind = ExtractedAnswer::Kind::Interval;
                ans.t_s = *a;
                ans.t_e = *b;
            }
        }
        break;
    }
    return ans;
}

FormatVerdict validate_format(const TokenStream& stream) {
    // Structure is judged on the policy's own tokens; prompt and injected
    // material are environment output.
    std::vector<std::size_t> view;
    for (std::size_t i = 0; i < stream.tokens.size(); ++i)
        if (stream.tokens[i].origin == Origin::Policy) view.push_back(i);

    const auto& toks = stream.tokens;
    bool unpaired = false, bad_ordering = false, bad_decimal = false;
    std::vector<std::size_t> span_opens, span_closes, fps_opens, fps_closes;
    std::vector<std::size_t> think_opens, think_closes, ans_opens, ans_closes;
    for (std::size_t v = 0; v < view.size(); ++v) {
        switch (toks[view[v]].role) {
            case Role::SpanOpen: span_opens.push_back(v); break;
            case Role::SpanClose: span_closes.push_back(v); break;
            case Role::FpsOpen: fps_opens.push_back(v); break;
            case Role::FpsClose: fps_closes.push_back(v); break;
            case Role::ThinkOpen: think_opens.push_back(v); break;
            case Role::ThinkClose: think_closes.push_back(v); break;
            case Role::AnswerOpen: ans_opens.push_back(v); break;
            case Role::AnswerClose: ans_closes.push_back(v); break;
            case Role::Text:
                if (is_known_tag(toks[view[v]].surface)) unpaired = true;
                break;
            case Role::Timestamp:
            case Role::VisionStart:
            case Role::VisionEnd:
            case Role::FrameContent:
                bad_ordering = true;  // frame material is never policy output
                break;
            default:
                break;
        }
    }

    bool reversed = false, fps_out = false;
    if (!span_opens.empty()) {
        std::size_t so = span_opens[0];
        const std::string& a = toks[view[so + 1]].surface;
        const std::string& b = toks[view[so + 3]].surface;
        auto va = parse_number(a);
        auto vb = parse_number(b);
        if (va && vb && *vb <= *va) reversed = true;
        if (!is_two_decimal(a) || !is_two_decimal(b)) bad_decimal = true;
    }
    if (!fps_opens.empty()) {
        auto f = parse_number(toks[view[fps_opens[0] + 1]].surface);
        if (f && (*f < 1.0 || *f > 6.0)) fps_out = true;
    }

    // Answer construct and payload shape.
    bool answer_ok = false;
    if (!ans_opens.empty() && !ans_closes.empty()) {
        std::size_t b = ans_opens[0], e = ans_closes[0];
        std::size_t count = e - b - 1;
        if (count == 1 && !is_known_tag(toks[view[b + 1]].surface)) {
            answer_ok = true;
        } else if (count == 3 && toks[view[b + 2]].surface == "-" &&
                   is_number_like(toks[view[b + 1]].surface) &&
                   is_number_like(toks[view[b + 3]].surface)) {
            answer_ok = true;
            if (!is_two_decimal(toks[view[b + 1]].surface) ||
                !is_two_decimal(toks[view[b + 3]].surface))
                bad_decimal = true;
        }
    }

    // Ordering: <think> text* span fps text* </think> <answer> payload </answer>
    if (think_opens.empty() || think_closes.empty()) {
        if (!view.empty()) bad_ordering = true;
    } else {
        std::size_t to = think_opens[0], tc = think_closes[0];
        if (to != 0) bad_ordering = true;
        if (think_opens.size() > 1 || think_closes.size() > 1) bad_ordering = true;
        if (!span_opens.empty() && !(to < span_opens[0] && span_closes[0] < tc))
            bad_ordering = true;
        if (!fps_opens.empty()) {
            if (!(to < fps_opens[0] && fps_closes[0] < tc)) bad_ordering = true;
            if (!span_closes.empty() && fps_opens[0] != span_closes[0] + 1) bad_ordering = true;
        }
        if (!ans_opens.empty()) {
            if (ans_opens[0] != tc + 1) bad_ordering = true;
            if (ans_opens.size() > 1) bad_ordering = true;
            if (!ans_closes.empty() && ans_closes[0] + 1 != view.size()) bad_ordering = true;
        }
    }

    FormatVerdict out;
    if (span_opens.empty()) out.violations.push_back(Violation::MissingSpan);
    if (fps_closes.empty()) out.violations.push_back(Violation::MissingFps);
    if (reversed) out.violations.push_back(Violation::ReversedSpan);
    if (fps_out) out.violations.push_back(Violation::FpsOutOfRange);
    if (span_opens.size() > 1 || fps_closes.size() > 1)
        out.violations.push_back(Violation::MultipleCommands);
    if (!answer_ok) out.violations.push_back(Violation::MissingAnswer);
    if (bad_decimal) out.violations.push_back(Violation::BadDecimalFormat);
    if (unpaired) out.violations.push_back(Violation::UnpairedTag);
    if (bad_ordering) out.violations.push_back(Violation::BadOrdering);
    out.valid = out.violations.empty();
    return out;
}

const char* violation_name(Violation v) {
    switch (v) {
        case Violation::MissingSpan: return "MissingSpan";
        case Violation::MissingFps: return "MissingFps";
        case Violation::ReversedSpan: return "ReversedSpan";
        case Violation::FpsOutOfRange: return "FpsOutOfRange";
        case Violation::BadOrdering: return "BadOrdering";
        case Violation::UnpairedTag: return "UnpairedTag";
        case Violation::MultipleCommands: return "MultipleCommands";
        case Violation::MissingAnswer: return "MissingAnswer";
        case Violation::BadDecimalFormat: return "BadDecimalFormat";
    }
    return "?";
}

std::string format_seconds(double seconds) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", seconds);
    return buf;
}

}  // namespace framelab
