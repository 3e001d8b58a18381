#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "../combinat.hpp"
#include "../errors.hpp"
#include "../rational.hpp"
#include "../space.hpp"

namespace freepoisson::cli {

using nlohmann::json;

/// Maps JSON pointers ("/space/cells/0/mass") to the 1-based line where the
/// value starts. Only used for error messages, so it assumes the document
/// already parsed.
class LineLocator {
public:
    explicit LineLocator(std::string_view text) : text_(text) {
        skip_ws();
        if (pos_ < text_.size())
            value("");
    }

    /// Line of `pointer`, or of its nearest recorded ancestor.
    std::size_t line(std::string pointer) const {
        while (true) {
            if (auto it = lines_.find(pointer); it != lines_.end())
                return it->second;
            if (pointer.empty())
                return 1;
            pointer.erase(pointer.rfind('/'));
        }
    }

    static std::size_t line_of_offset(std::string_view text, std::size_t offset) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < offset && i < text.size(); ++i)
            if (text[i] == '\n')
                ++line;
        return line;
    }

    static std::string escape(const std::string& token) {
        std::string out;
        for (char c : token) {
            if (c == '~')
                out += "~0";
            else if (c == '/')
                out += "~1";
            else
                out += c;
        }
        return out;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
                                       text_[pos_] == '\n')) {
            if (text_[pos_] == '\n')
                ++line_;
            ++pos_;
        }
    }

    std::string string() {
        std::string out;
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\') {
                ++pos_;
                if (pos_ < text_.size() && text_[pos_] == 'u') {
                    // keys with \u escapes only need a stable token, not the decoded text
                    out += "\\u";
                    ++pos_;
                    continue;
                }
            }
            if (pos_ < text_.size())
                out += text_[pos_++];
        }
        ++pos_;
        return out;
    }

    void value(const std::string& pointer) {
        lines_.emplace(pointer, line_);
        char c = text_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < text_.size() && text_[pos_] != '}') {
                auto key = string();
                skip_ws();
                ++pos_; // ':'
                skip_ws();
                value(pointer + "/" + escape(key));
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                }
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            std::size_t index = 0;
            while (pos_ < text_.size() && text_[pos_] != ']') {
                value(pointer + "/" + std::to_string(index++));
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                }
            }
            ++pos_;
        } else if (c == '"') {
            string();
        } else {
            while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos)
                ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;
};

enum class Mode { Moments, Converge, Oracle, Partitions };
enum class CountMode { Fixed, Poissonized };
enum class Format { Csv, Json };

inline std::string to_string(Mode m) {
    switch (m) {
    case Mode::Moments:
        return "moments";
    case Mode::Converge:
        return "converge";
    case Mode::Oracle:
        return "oracle";
    case Mode::Partitions:
        return "partitions";
    }
    return "";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "moments")
        return Mode::Moments;
    if (s == "converge")
        return Mode::Converge;
    if (s == "oracle")
        return Mode::Oracle;
    if (s == "partitions")
        return Mode::Partitions;
    return std::nullopt;
}

/// How the particle number is chosen. In fixed mode N is either given or
/// round(rho * V) with ties to even; in poissonized mode alpha is either
/// given or rho * V.
struct CountRule {
    CountMode mode = CountMode::Fixed;
    std::optional<Rational> rho;
    std::optional<std::int64_t> n;
    std::optional<Rational> alpha;
};

struct OracleSettings {
    std::size_t max_particles = 2;
    std::size_t max_word_length = 4;
    std::size_t depth = 0; // 0: word length
    Rational poisson_alpha = 2;
    std::size_t poisson_max_word_length = 3;
    double tail_tolerance = 1e-9;
    std::size_t freeness_max_word_length = 4;
};

inline constexpr std::size_t kOracleMaxParticles = 3;
inline constexpr std::size_t kOracleMaxWordLength = 5;
inline constexpr std::size_t kOracleMaxCells = 3;

struct ExperimentConfig {
    std::optional<Mode> mode;
    std::optional<DiscreteSpace> space;
    std::optional<std::size_t> bulk;
    std::optional<JumpMeasure> jumps;
    std::vector<std::string> function_names;
    std::vector<TestFunction> functions;
    std::vector<std::vector<std::size_t>> words;
    CountRule count;
    bool centered = false;
    std::vector<Rational> schedule;
    std::size_t partitions_n = 0;
    OracleSettings oracle;
    std::optional<std::string> output_path;
    Format format = Format::Csv;

    std::size_t function_index(const std::string& name) const {
        for (std::size_t i = 0; i < function_names.size(); ++i)
            if (function_names[i] == name)
                return i;
        throw UsageError("unknown function '" + name + "'");
    }

    std::vector<TestFunction> word_functions(const std::vector<std::size_t>& word) const {
        std::vector<TestFunction> fs;
        for (auto i : word)
            fs.push_back(functions.at(i));
        return fs;
    }

    std::string word_label(const std::vector<std::size_t>& word) const {
        std::string out;
        for (std::size_t j = 0; j < word.size(); ++j) {
            if (j)
                out += ' ';
            out += function_names.at(word[j]);
        }
        return out;
    }
};

namespace detail {

class Reader {
public:
    Reader(const json& doc, const LineLocator& loc) : doc_(doc), loc_(loc) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        throw ConfigError(loc_.line(pointer), (pointer.empty() ? std::string("document") : pointer) + ": " + msg);
    }

    const json& at(const std::string& pointer) const { return doc_.at(json::json_pointer(pointer)); }
    bool has(const std::string& pointer) const { return doc_.contains(json::json_pointer(pointer)); }

    void only_keys(const std::string& pointer, std::initializer_list<std::string_view> allowed) const {
        const auto& obj = object(pointer);
        for (const auto& [key, v] : obj.items()) {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || a == key;
            if (!ok)
                fail(pointer + "/" + LineLocator::escape(key), "unknown key '" + key + "'");
        }
    }

    const json& object(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (!v.is_object())
            fail(pointer, "expected an object");
        return v;
    }

    const json& array(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (!v.is_array())
            fail(pointer, "expected an array");
        return v;
    }

    std::string string(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (!v.is_string())
            fail(pointer, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (!v.is_boolean())
            fail(pointer, "expected true or false");
        return v.get<bool>();
    }

    std::int64_t integer(const std::string& pointer, std::int64_t lo, std::int64_t hi) const {
        const auto& v = at(pointer);
        if (!v.is_number_integer())
            fail(pointer, "expected an integer");
        auto x = v.get<std::int64_t>();
        if (x < lo || x > hi)
            fail(pointer, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
        return x;
    }

    double number(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (!v.is_number())
            fail(pointer, "expected a number");
        return v.get<double>();
    }

    /// "p/q" string or a JSON integer.
    Rational rational(const std::string& pointer) const {
        const auto& v = at(pointer);
        if (v.is_number_integer())
            return Rational(v.get<std::int64_t>());
        if (!v.is_string())
            fail(pointer, "expected a rational as a \"p/q\" string");
        try {
            return Rational::parse(v.get<std::string>());
        } catch (const std::exception& e) {
            fail(pointer, e.what());
        }
    }

private:
    const json& doc_;
    const LineLocator& loc_;
};

inline std::string child(const std::string& pointer, const std::string& key) {
    return pointer + "/" + LineLocator::escape(key);
}

inline std::string child(const std::string& pointer, std::size_t index) {
    return pointer + "/" + std::to_string(index);
}

inline void read_space(const Reader& r, ExperimentConfig& cfg) {
    r.only_keys("/space", {"cells", "bulk"});
    if (!r.has("/space/cells"))
        r.fail("/space", "missing 'cells'");
    const auto& cells = r.array("/space/cells");
    if (cells.empty())
        r.fail("/space/cells", "at least one cell required");
    std::vector<std::string> ids;
    std::vector<Rational> masses;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto p = child("/space/cells", i);
        r.object(p);
        r.only_keys(p, {"id", "mass"});
        if (!r.has(p + "/id") || !r.has(p + "/mass"))
            r.fail(p, "cell needs 'id' and 'mass'");
        auto id = r.string(p + "/id");
        if (id.empty())
            r.fail(p + "/id", "empty cell id");
        for (const auto& seen : ids)
            if (seen == id)
                r.fail(p + "/id", "duplicate cell id '" + id + "'");
        auto m = r.rational(p + "/mass");
        if (m.sign() < 0)
            r.fail(p + "/mass", "cell mass must be non-negative");
        ids.push_back(id);
        masses.push_back(m);
    }
    try {
        cfg.space.emplace(ids, masses);
    } catch (const UsageError& e) {
        r.fail("/space", e.what());
    }
    if (r.has("/space/bulk")) {
        auto id = r.string("/space/bulk");
        cfg.bulk = cfg.space->index_of(id);
        if (!cfg.bulk)
            r.fail("/space/bulk", "bulk cell '" + id + "' is not a cell of the space");
    }
}

inline void read_jumps(const Reader& r, ExperimentConfig& cfg) {
    const auto& atoms = r.array("/jumps");
    if (atoms.empty())
        r.fail("/jumps", "at least one atom required");
    std::vector<JumpMeasure::Atom> out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        auto p = child("/jumps", i);
        r.object(p);
        r.only_keys(p, {"size", "mass"});
        if (!r.has(p + "/size") || !r.has(p + "/mass"))
            r.fail(p, "atom needs 'size' and 'mass'");
        auto s = r.rational(p + "/size");
        auto m = r.rational(p + "/mass");
        if (s.is_zero())
            r.fail(p + "/size", "jump size must be nonzero");
        if (m.sign() <= 0)
            r.fail(p + "/mass", "atom mass must be positive");
        out.push_back({s, m});
    }
    cfg.jumps.emplace(std::move(out));
}

inline void read_functions(const Reader& r, ExperimentConfig& cfg) {
    const auto& fns = r.object("/functions");
    for (const auto& [name, body] : fns.items()) {
        auto p = child("/functions", name);
        if (name.empty() || name.find_first_of(" \t\n,\"") != std::string::npos)
            r.fail(p, "function names must be nonempty and contain no spaces, commas or quotes");
        r.object(p);
        std::vector<Rational> values(cfg.space->size(), 0);
        for (const auto& [cell, v] : body.items()) {
            auto idx = cfg.space->index_of(cell);
            if (!idx)
                r.fail(child(p, cell), "unknown cell '" + cell + "'");
            values[*idx] = r.rational(child(p, cell));
        }
        cfg.function_names.push_back(name);
        cfg.functions.emplace_back(std::move(values));
    }
    if (cfg.functions.empty())
        r.fail("/functions", "at least one function required");
}

inline void read_words(const Reader& r, ExperimentConfig& cfg) {
    const auto& words = r.array("/words");
    if (words.empty())
        r.fail("/words", "at least one word required");
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto p = child("/words", i);
        const auto& w = r.array(p);
        if (w.empty())
            r.fail(p, "empty word");
        if (w.size() > kWordCap)
            r.fail(p, "word length " + std::to_string(w.size()) + " exceeds cap " + std::to_string(kWordCap));
        std::vector<std::size_t> word;
        for (std::size_t j = 0; j < w.size(); ++j) {
            auto name = r.string(child(p, j));
            std::optional<std::size_t> idx;
            for (std::size_t f = 0; f < cfg.function_names.size(); ++f)
                if (cfg.function_names[f] == name)
                    idx = f;
            if (!idx)
                r.fail(child(p, j), "undefined function '" + name + "'");
            word.push_back(*idx);
        }
        cfg.words.push_back(std::move(word));
    }
}

inline void read_count(const Reader& r, ExperimentConfig& cfg) {
    r.only_keys("/count", {"mode", "rho", "N", "alpha"});
    auto& c = cfg.count;
    if (r.has("/count/mode")) {
        auto m = r.string("/count/mode");
        if (m == "fixed")
            c.mode = CountMode::Fixed;
        else if (m == "poissonized")
            c.mode = CountMode::Poissonized;
        else
            r.fail("/count/mode", "expected \"fixed\" or \"poissonized\"");
    }
    if (r.has("/count/rho")) {
        c.rho = r.rational("/count/rho");
        if (c.rho->sign() <= 0)
            r.fail("/count/rho", "rho must be positive");
    }
    if (r.has("/count/N")) {
        if (c.mode != CountMode::Fixed)
            r.fail("/count/N", "'N' only applies to fixed count mode");
        c.n = r.integer("/count/N", 0, 1'000'000'000);
    }
    if (r.has("/count/alpha")) {
        if (c.mode != CountMode::Poissonized)
            r.fail("/count/alpha", "'alpha' only applies to poissonized count mode");
        c.alpha = r.rational("/count/alpha");
        if (c.alpha->sign() < 0)
            r.fail("/count/alpha", "alpha must be non-negative");
    }
    if (c.rho && (c.n || c.alpha))
        r.fail("/count", "give either 'rho' or an explicit N/alpha, not both");
    if (!c.rho && !c.n && !c.alpha)
        r.fail("/count", c.mode == CountMode::Fixed ? "need 'rho' or 'N'" : "need 'rho' or 'alpha'");
}

inline void read_schedule(const Reader& r, ExperimentConfig& cfg) {
    const auto& s = r.array("/schedule");
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto p = child("/schedule", i);
        auto c = r.rational(p);
        if (c.sign() <= 0)
            r.fail(p, "scale factors must be positive");
        if (!cfg.schedule.empty() && !(cfg.schedule.back() < c))
            r.fail(p, "schedule must be strictly increasing");
        cfg.schedule.push_back(c);
    }
}

inline void read_oracle(const Reader& r, ExperimentConfig& cfg) {
    r.only_keys("/oracle", {"max_particles", "max_word_length", "depth", "poisson_alpha", "poisson_max_word_length",
                            "tail_tolerance", "freeness_max_word_length"});
    auto& o = cfg.oracle;
    auto lim = [](std::size_t x) { return static_cast<std::int64_t>(x); };
    // bounds above the desk-scale caps are resource errors, reported separately
    if (r.has("/oracle/max_particles"))
        o.max_particles = static_cast<std::size_t>(r.integer("/oracle/max_particles", 1, 1'000'000));
    if (r.has("/oracle/max_word_length"))
        o.max_word_length = static_cast<std::size_t>(r.integer("/oracle/max_word_length", 1, lim(kWordCap)));
    if (r.has("/oracle/depth"))
        o.depth = static_cast<std::size_t>(r.integer("/oracle/depth", 1, 64));
    if (r.has("/oracle/poisson_alpha")) {
        o.poisson_alpha = r.rational("/oracle/poisson_alpha");
        if (o.poisson_alpha.sign() < 0)
            r.fail("/oracle/poisson_alpha", "alpha must be non-negative");
    }
    if (r.has("/oracle/poisson_max_word_length"))
        o.poisson_max_word_length =
            static_cast<std::size_t>(r.integer("/oracle/poisson_max_word_length", 0, lim(kWordCap)));
    if (r.has("/oracle/freeness_max_word_length"))
        o.freeness_max_word_length =
            static_cast<std::size_t>(r.integer("/oracle/freeness_max_word_length", 0, lim(kWordCap)));
    if (r.has("/oracle/tail_tolerance")) {
        o.tail_tolerance = r.number("/oracle/tail_tolerance");
        if (!(o.tail_tolerance > 0))
            r.fail("/oracle/tail_tolerance", "must be positive");
    }
}

inline void read_output(const Reader& r, ExperimentConfig& cfg) {
    r.only_keys("/output", {"path", "format"});
    if (r.has("/output/path"))
        cfg.output_path = r.string("/output/path");
    if (r.has("/output/format")) {
        auto f = r.string("/output/format");
        if (f == "csv")
            cfg.format = Format::Csv;
        else if (f == "json")
            cfg.format = Format::Json;
        else
            r.fail("/output/format", "expected \"csv\" or \"json\"");
    }
}

} // namespace detail

/// Parses and validates a config document. `mode_override` is the CLI
/// subcommand; it must agree with the document's "mode" when both are given.
inline ExperimentConfig parse_config(std::string_view text, std::optional<Mode> mode_override = std::nullopt) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(LineLocator::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1),
                          std::string("invalid JSON: ") + e.what());
    }
    LineLocator loc(text);
    detail::Reader r(doc, loc);
    if (!doc.is_object())
        r.fail("", "config must be a JSON object");
    r.only_keys("", {"mode", "space", "jumps", "functions", "words", "count", "centered", "schedule", "partitions",
                     "oracle", "output"});

    ExperimentConfig cfg;
    if (r.has("/mode")) {
        cfg.mode = parse_mode(r.string("/mode"));
        if (!cfg.mode)
            r.fail("/mode", "expected one of moments, converge, oracle, partitions");
        if (mode_override && *mode_override != *cfg.mode)
            r.fail("/mode", "config is for mode '" + to_string(*cfg.mode) + "' but subcommand is '" +
                                to_string(*mode_override) + "'");
    } else {
        cfg.mode = mode_override;
    }
    if (!cfg.mode)
        throw ConfigError(1, "no mode: give a subcommand or a \"mode\" key");
    const Mode mode = *cfg.mode;

    auto require = [&](const char* key) {
        if (!r.has(std::string("/") + key))
            r.fail("", std::string("mode '") + to_string(mode) + "' requires '" + key + "'");
    };

    if (r.has("/output"))
        detail::read_output(r, cfg);

    if (mode == Mode::Partitions) {
        require("partitions");
        r.only_keys("/partitions", {"n"});
        if (!r.has("/partitions/n"))
            r.fail("/partitions", "missing 'n'");
        cfg.partitions_n = static_cast<std::size_t>(r.integer("/partitions/n", 1, 1'000'000));
        return cfg;
    }

    require("space");
    require("functions");
    detail::read_space(r, cfg);
    if (r.has("/jumps"))
        detail::read_jumps(r, cfg);
    detail::read_functions(r, cfg);
    if (r.has("/centered"))
        cfg.centered = r.boolean("/centered");

    if (mode == Mode::Oracle) {
        if (r.has("/oracle"))
            detail::read_oracle(r, cfg);
        return cfg;
    }

    require("words");
    require("count");
    detail::read_words(r, cfg);
    detail::read_count(r, cfg);

    if (mode == Mode::Converge) {
        require("schedule");
        detail::read_schedule(r, cfg);
        if (cfg.schedule.size() < 3)
            r.fail("/schedule", "at least 3 schedule points are needed to estimate the order");
        if (!cfg.bulk)
            r.fail("/space", "converge mode needs a 'bulk' cell to scale");
        if (!cfg.count.rho)
            r.fail("/count", "converge mode needs 'rho' so that N (or alpha) follows the volume");
        for (std::size_t i = 0; i < cfg.schedule.size(); ++i)
            if ((cfg.space->mass(*cfg.bulk) + (cfg.schedule[i] - 1) * cfg.space->total()).sign() < 0)
                r.fail(detail::child("/schedule", i), "scale factor would give the bulk cell negative mass");
        for (std::size_t f = 0; f < cfg.functions.size(); ++f)
            if (!cfg.functions[f][*cfg.bulk].is_zero())
                r.fail(detail::child("/functions", cfg.function_names[f]),
                       "function '" + cfg.function_names[f] + "' must vanish on the bulk cell");
    } else if (r.has("/schedule")) {
        r.fail("/schedule", "'schedule' only applies to converge mode");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), mode_override);
}

} // namespace freepoisson::cli
