#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace framelab {

// Trajectory grammar
// ------------------
// A trajectory is a flat string of whitespace-separated symbols plus a fixed
// set of structural tags that may abut their neighbours:
//
//   <think><span>29.50 - 74.00</span> <fps>3</fps> ...text... 41.37
//   <|vision_start|> k03 <|vision_end|> ... </think><answer>B</answer>
//
// Parsing is total: tag regions that do not form a complete construct degrade
// to plain Text tokens and are reported by validate_format, never thrown.

enum class Role {
    Text,
    SpanOpen,
    SpanClose,
    FpsOpen,
    FpsClose,
    ThinkOpen,
    ThinkClose,
    AnswerOpen,
    AnswerClose,
    Timestamp,
    VisionStart,
    VisionEnd,
    FrameContent,
    Numeral,
};

enum class Origin { Policy, Injected, Prompt };

struct Token {
    std::string surface;
    Role role = Role::Text;
    Origin origin = Origin::Policy;
    bool space_before = false;  // a single space is emitted before this token when serializing

    bool operator==(const Token& o) const {
        return surface == o.surface && role == o.role && origin == o.origin &&
               space_before == o.space_before;
    }
};

struct TokenStream {
    std::vector<Token> tokens;
    std::optional<std::size_t> t_fps;  // index of the first well-formed FpsClose

    bool operator==(const TokenStream& o) const {
        return tokens == o.tokens && t_fps == o.t_fps;
    }
    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
};

// Span plus sampling density parsed out of the first complete <span>/<fps> pair.
struct RetrievalCommand {
    double t_s = 0.0;
    double t_e = 0.0;
    int f = 0;
};

enum class Violation {
    MissingSpan,
    MissingFps,
    ReversedSpan,
    FpsOutOfRange,
    BadOrdering,
    UnpairedTag,
    MultipleCommands,
    MissingAnswer,
    BadDecimalFormat,
};

struct FormatVerdict {
    bool valid = false;
    std::vector<Violation> violations;  // valid <=> violations empty
};

// Half-open index ranges partitioning a stream at the retrieval boundary.
struct SegmentSplit {
    std::size_t sampling_begin = 0;
    std::size_t sampling_end = 0;  // one past the FpsClose token
    std::size_t reasoning_begin = 0;
    std::size_t reasoning_end = 0;
};

// Answer payload extracted from the first well-formed answer construct.
struct ExtractedAnswer {
    enum class Kind { None, Symbol, Interval } kind = Kind::None;
    std::string symbol;
    double t_s = 0.0;
    double t_e = 0.0;
};

const std::vector<std::string>& known_tags();
bool is_known_tag(const std::string& s);

// Re-derives roles and t_fps over an existing token list (surfaces and origins
// are left untouched). parse() uses this after lexing; rollout construction
// uses it directly so environment-assigned origins survive.
void assign_roles(std::vector<Token>& tokens, std::optional<std::size_t>& t_fps);

TokenStream parse(const std::string& text, Origin default_origin = Origin::Policy);
std::string serialize(const TokenStream& stream);

FormatVerdict validate_format(const TokenStream& stream);
SegmentSplit split_segments(const TokenStream& stream);
std::optional<RetrievalCommand> parse_retrieval_command(const TokenStream& stream);
ExtractedAnswer extract_answer(const TokenStream& stream);

const char* violation_name(Violation v);
std::string format_seconds(double seconds);  // two-decimal fixed point

// Environment hook invoked at the first retrieval terminator: returns the
// injected block for a command, or nothing when the command is unusable.
using Injector = std::function<std::optional<std::vector<Token>>(const RetrievalCommand&)>;

}  // namespace framelab
