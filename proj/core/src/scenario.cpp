// SPDX-License-Identifier: Apache-2.0
#include "nfrm/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nfrm/error.hpp"

namespace nfrm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// ---------------------------------------------------------------------------
// Values

struct Value {
    enum class Kind { number, boolean, none, automatic, string, tuple, list };
    Kind kind = Kind::none;
    double number = 0.0;
    std::string text; // raw token for numbers, contents for strings
    bool boolean = false;
    std::vector<Value> items;
};

std::string_view kind_name(Value::Kind k)
{
    switch (k) {
    case Value::Kind::number: return "number";
    case Value::Kind::boolean: return "boolean";
    case Value::Kind::none: return "none";
    case Value::Kind::automatic: return "auto";
    case Value::Kind::string: return "string";
    case Value::Kind::tuple: return "tuple";
    case Value::Kind::list: return "list";
    }
    return "value";
}

class ValueParser {
public:
    ValueParser(std::string_view src, int line) : src_(src), line_(line) {}

    Value parse_all()
    {
        Value v = parse_value();
        skip_ws();
        if (pos_ != src_.size())
            fail("unexpected trailing characters '" + std::string(src_.substr(pos_)) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(ErrorCode::syntax, line_, msg); }

    void skip_ws()
    {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t'))
            ++pos_;
    }

    bool at_end() const { return pos_ >= src_.size(); }

    Value parse_sequence(char close, Value::Kind kind)
    {
        Value v;
        v.kind = kind;
        ++pos_;
        skip_ws();
        if (!at_end() && src_[pos_] == close) {
            ++pos_;
            return v;
        }
        while (true) {
            v.items.push_back(parse_value());
            skip_ws();
            if (at_end())
                fail(std::string("missing closing '") + close + "'");
            if (src_[pos_] == close) {
                ++pos_;
                return v;
            }
            if (src_[pos_] != ',')
                fail(std::string("expected ',' or '") + close + "'");
            ++pos_;
        }
    }

    Value parse_value()
    {
        skip_ws();
        if (at_end())
            fail("missing value");
        const char c = src_[pos_];
        if (c == '[')
            return parse_sequence(']', Value::Kind::list);
        if (c == '(')
            return parse_sequence(')', Value::Kind::tuple);
        if (c == '"') {
            Value v;
            v.kind = Value::Kind::string;
            ++pos_;
            while (true) {
                if (at_end())
                    fail("unterminated string");
                const char ch = src_[pos_++];
                if (ch == '"')
                    break;
                if (ch == '\\') {
                    if (at_end())
                        fail("unterminated string");
                    v.text.push_back(src_[pos_++]);
                } else {
                    v.text.push_back(ch);
                }
            }
            return v;
        }
        const std::size_t start = pos_;
        while (!at_end() && src_[pos_] != ',' && src_[pos_] != ']' && src_[pos_] != ')' && src_[pos_] != ' ' &&
               src_[pos_] != '\t')
            ++pos_;
        const std::string word(src_.substr(start, pos_ - start));
        if (word.empty())
            fail("missing value");
        Value v;
        if (word == "true" || word == "false") {
            v.kind = Value::Kind::boolean;
            v.boolean = word == "true";
            return v;
        }
        if (word == "none") {
            v.kind = Value::Kind::none;
            return v;
        }
        if (word == "auto") {
            v.kind = Value::Kind::automatic;
            return v;
        }
        const bool numeric_start = std::isdigit(static_cast<unsigned char>(word[0])) || word[0] == '-' ||
                                   word[0] == '+' || word[0] == '.';
        if (numeric_start) {
            char* end = nullptr;
            const double d = std::strtod(word.c_str(), &end);
            if (end != word.c_str() + word.size())
                fail("malformed number '" + word + "'");
            if (!std::isfinite(d))
                fail("number out of range '" + word + "'");
            v.kind = Value::Kind::number;
            v.number = d;
            v.text = word;
            return v;
        }
        v.kind = Value::Kind::string;
        v.text = word;
        return v;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
};

// ---------------------------------------------------------------------------
// Typed accessors

struct Entry {
    Value value;
    int line = 0;
};

[[noreturn]] void semantic(int line, const std::string& msg) { throw ParseError(ErrorCode::semantic, line, msg); }

void expect_kind(const Entry& e, Value::Kind kind, const std::string& key)
{
    if (e.value.kind != kind)
        semantic(e.line, "'" + key + "' expects a " + std::string(kind_name(kind)) + ", got " +
                             std::string(kind_name(e.value.kind)));
}

double as_number(const Value& v, int line, const std::string& key)
{
    if (v.kind != Value::Kind::number)
        semantic(line, "'" + key + "' expects a number, got " + std::string(kind_name(v.kind)));
    return v.number;
}

int as_int(const Value& v, int line, const std::string& key)
{
    const double d = as_number(v, line, key);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        semantic(line, "'" + key + "' expects an integer");
    return static_cast<int>(d);
}

Vec2 as_point(const Value& v, int line, const std::string& key)
{
    if (v.kind != Value::Kind::tuple || v.items.size() != 2)
        semantic(line, "'" + key + "' expects a point (x, y)");
    return {as_number(v.items[0], line, key), as_number(v.items[1], line, key)};
}

std::vector<double> as_numbers(const Value& v, int line, const std::string& key)
{
    if (v.kind != Value::Kind::list)
        semantic(line, "'" + key + "' expects a list of numbers");
    std::vector<double> out;
    for (const auto& item : v.items)
        out.push_back(as_number(item, line, key));
    return out;
}

std::vector<Vec2> as_points(const Value& v, int line, const std::string& key)
{
    if (v.kind != Value::Kind::list)
        semantic(line, "'" + key + "' expects a list of points");
    std::vector<Vec2> out;
    for (const auto& item : v.items)
        out.push_back(as_point(item, line, key));
    return out;
}

AngleRange as_range(const Value& v, int line, const std::string& key)
{
    if (v.kind != Value::Kind::tuple || v.items.size() != 3)
        semantic(line, "'" + key + "' expects (start, stop, step) in degrees");
    AngleRange r{as_number(v.items[0], line, key), as_number(v.items[1], line, key),
                 as_number(v.items[2], line, key)};
    if (!(r.step_deg > 0.0) || !(r.stop_deg >= r.start_deg))
        semantic(line, "'" + key + "' needs step > 0 and stop >= start");
    return r;
}

// ---------------------------------------------------------------------------
// Formatting

std::string fmt(double d)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    return std::string(buf.data(), res.ptr);
}

std::string fmt(const Vec2& p) { return "(" + fmt(p.x) + ", " + fmt(p.y) + ")"; }

template <class T, class F>
std::string fmt_list(const std::vector<T>& v, F&& each)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ", ";
        s += each(v[i]);
    }
    return s + "]";
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

// ---------------------------------------------------------------------------
// Presets

constexpr std::string_view kPaperRoom = R"(# 20 m x 10 m room. The receiver track runs along the bottom wall, which is
# treated as non-reflective so that three first-order images remain.
name = paper-room

[room]
vertices = [(-6, -0.5), (14, -0.5), (14, 9.5), (-6, 9.5)]
reflective = [false, true, true, true]
reflection_loss = 0.7
max_order = 1

[transmitter]
position = (5, 6)
# equilateral triangle, side lambda / 2, centred on the reference
array_wavelengths = [(0, 0.28867513459481287), (-0.25, -0.14433756729740643), (0.25, -0.14433756729740643)]

[receiver]
position = (0, 0)
offsets = [0, 0.4, 0.8]
spacings_wavelengths = [0.5, 1, 2]

[frequency]
center = 10e9
bandwidth = 500e6
tones = 128

[simulation]
snr_db = none
coherent = false
seed = 1

[estimation]
aoa_grid_deg = (0, 180, 1)
aod_grid_deg = (-179, 180, 1)
delay_step = auto
support_db = 30
l_max = 4
stop_fraction = 1e-4
refine = true
subsets = auto

[heatmap]
region = (-26, -10.5, 34, 19.5)
cell = 0.05
concentration = auto
)";

std::string replace_line(std::string text, std::string_view key, std::string_view replacement)
{
    const auto pos = text.find(std::string(key));
    const auto end = text.find('\n', pos);
    return text.replace(pos, end - pos, replacement);
}

const std::map<std::string, std::string, std::less<>>& presets()
{
    static const std::map<std::string, std::string, std::less<>> table = [] {
        std::map<std::string, std::string, std::less<>> t;
        const std::string base(kPaperRoom);
        t["paper-room"] = base;
        t["paper-room-1ghz"] = replace_line(
            replace_line(replace_line(base, "name = ", "name = paper-room-1ghz"), "bandwidth = ", "bandwidth = 1e9"),
            "tones = ", "tones = 256");
        t["track-experiment"] = replace_line(replace_line(base, "name = ", "name = track-experiment"),
                                             "offsets = ", "offsets = [0, 0.3, 0.6]");
        return t;
    }();
    return table;
}

// ---------------------------------------------------------------------------
// Schema

using Handler = std::function<void(ScenarioConfig&, const Entry&, const std::string&)>;

const std::map<std::string, std::map<std::string, Handler>>& schema()
{
    using K = Value::Kind;
    static const std::map<std::string, std::map<std::string, Handler>> table = {
        {"",
         {{"name",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               expect_kind(e, K::string, k);
               c.name = e.value.text;
           }}}},
        {"room",
         {{"vertices",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.room_vertices = as_points(e.value, e.line, k);
           }},
          {"reflective",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               expect_kind(e, K::list, k);
               c.room_reflective.clear();
               for (const auto& v : e.value.items) {
                   if (v.kind != K::boolean)
                       semantic(e.line, "'" + k + "' expects a list of booleans");
                   c.room_reflective.push_back(v.boolean);
               }
           }},
          {"reflection_loss",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.reflection_loss = as_number(e.value, e.line, k);
               if (!(c.reflection_loss >= 0.0 && c.reflection_loss <= 1.0))
                   semantic(e.line, "'reflection_loss' must lie in [0, 1]");
           }},
          {"max_order",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.max_order = as_int(e.value, e.line, k);
               if (c.max_order < 0)
                   semantic(e.line, "'max_order' must be >= 0");
           }}}},
        {"transmitter",
         {{"position", [](ScenarioConfig& c, const Entry& e,
                          const std::string& k) { c.tx_ref = as_point(e.value, e.line, k); }},
          {"array_wavelengths",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.tx_array = as_points(e.value, e.line, k);
               if (c.tx_array.empty())
                   semantic(e.line, "'array_wavelengths' needs at least one element");
           }}}},
        {"receiver",
         {{"position", [](ScenarioConfig& c, const Entry& e,
                          const std::string& k) { c.rx_ref = as_point(e.value, e.line, k); }},
          {"offsets",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.offsets = as_numbers(e.value, e.line, k);
               if (c.offsets.empty())
                   semantic(e.line, "'offsets' needs at least one value");
           }},
          {"spacings_wavelengths",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.spacings_wavelengths = as_numbers(e.value, e.line, k);
               if (c.spacings_wavelengths.empty())
                   semantic(e.line, "'spacings_wavelengths' needs at least one value");
               for (double a : c.spacings_wavelengths)
                   if (!(a > 0.0))
                       semantic(e.line, "'spacings_wavelengths' must be positive");
           }},
          {"placements",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.placements.clear();
               if (e.value.kind == K::none)
                   return;
               expect_kind(e, K::list, k);
               for (const auto& item : e.value.items)
                   c.placements.push_back(as_points(item, e.line, k));
               if (c.placements.empty())
                   semantic(e.line, "'placements' needs at least one placement");
               for (const auto& p : c.placements)
                   if (p.empty() || p.size() != c.placements.front().size())
                       semantic(e.line, "every placement needs the same non-zero number of receivers");
           }}}},
        {"frequency",
         {{"center",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.grid.center = as_number(e.value, e.line, k);
               if (!(c.grid.center > 0.0))
                   semantic(e.line, "'center' must be positive");
           }},
          {"bandwidth",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.grid.bandwidth = as_number(e.value, e.line, k);
               if (!(c.grid.bandwidth > 0.0))
                   semantic(e.line, "'bandwidth' must be positive");
           }},
          {"tones",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.grid.num_tones = as_int(e.value, e.line, k);
               if (c.grid.num_tones < 2)
                   semantic(e.line, "'tones' must be >= 2");
           }}}},
        {"simulation",
         {{"snr_db",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               if (e.value.kind == K::none)
                   c.snr_db.reset();
               else
                   c.snr_db = as_number(e.value, e.line, k);
           }},
          {"coherent",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               expect_kind(e, K::boolean, k);
               c.coherent = e.value.boolean;
           }},
          {"seed",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               expect_kind(e, K::number, k);
               const auto& t = e.value.text;
               std::uint64_t s = 0;
               const auto res = std::from_chars(t.data(), t.data() + t.size(), s);
               if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
                   semantic(e.line, "'seed' expects a non-negative 64-bit integer");
               c.seed = s;
           }}}},
        {"estimation",
         {{"aoa_grid_deg", [](ScenarioConfig& c, const Entry& e,
                              const std::string& k) { c.aoa_grid = as_range(e.value, e.line, k); }},
          {"aod_grid_deg", [](ScenarioConfig& c, const Entry& e,
                              const std::string& k) { c.aod_grid = as_range(e.value, e.line, k); }},
          {"delay_step",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               if (e.value.kind == K::automatic) {
                   c.delay_step.reset();
                   return;
               }
               c.delay_step = as_number(e.value, e.line, k);
               if (!(*c.delay_step > 0.0))
                   semantic(e.line, "'delay_step' must be positive");
           }},
          {"support_db",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.support_db = as_number(e.value, e.line, k);
               if (!(c.support_db > 0.0))
                   semantic(e.line, "'support_db' must be positive");
           }},
          {"l_max",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.l_max = as_int(e.value, e.line, k);
               if (c.l_max < 1)
                   semantic(e.line, "'l_max' must be >= 1");
           }},
          {"stop_fraction",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.stop_fraction = as_number(e.value, e.line, k);
               if (!(c.stop_fraction >= 0.0 && c.stop_fraction < 1.0))
                   semantic(e.line, "'stop_fraction' must lie in [0, 1)");
           }},
          {"refine",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               expect_kind(e, K::boolean, k);
               c.refine = e.value.boolean;
           }},
          {"subsets",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.subsets.clear();
               if (e.value.kind == K::automatic)
                   return;
               expect_kind(e, K::list, k);
               for (const auto& item : e.value.items) {
                   std::vector<std::size_t> idx;
                   for (double d : as_numbers(item, e.line, k)) {
                       if (d < 0.0 || d != std::floor(d))
                           semantic(e.line, "'subsets' expects lists of measurement indices");
                       idx.push_back(static_cast<std::size_t>(d));
                   }
                   if (idx.empty())
                       semantic(e.line, "'subsets' entries must be non-empty");
                   c.subsets.push_back(std::move(idx));
               }
           }}}},
        {"heatmap",
         {{"region",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               if (e.value.kind != K::tuple || e.value.items.size() != 4)
                   semantic(e.line, "'region' expects (x0, y0, x1, y1)");
               c.region = {as_number(e.value.items[0], e.line, k), as_number(e.value.items[1], e.line, k),
                           as_number(e.value.items[2], e.line, k), as_number(e.value.items[3], e.line, k)};
               if (!(c.region.x1 > c.region.x0 && c.region.y1 > c.region.y0))
                   semantic(e.line, "'region' must have positive area");
           }},
          {"cell",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               c.cell = as_number(e.value, e.line, k);
               if (!(c.cell > 0.0))
                   semantic(e.line, "'cell' must be positive");
           }},
          {"concentration",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               if (e.value.kind == K::automatic) {
                   c.concentration.reset();
                   return;
               }
               c.concentration = as_number(e.value, e.line, k);
               if (!(*c.concentration > 0.0))
                   semantic(e.line, "'concentration' must be positive");
           }}}},
        {"output",
         {{"directory",
           [](ScenarioConfig& c, const Entry& e, const std::string& k) {
               if (e.value.kind == K::automatic) {
                   c.output_dir.clear();
                   return;
               }
               expect_kind(e, K::string, k);
               c.output_dir = e.value.text;
           }}}},
    };
    return table;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Drops a trailing comment, ignoring '#' inside quoted strings.
std::string_view strip_comment(std::string_view s)
{
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && quoted) {
            ++i;
            continue;
        }
        if (s[i] == '"')
            quoted = !quoted;
        else if (s[i] == '#' && !quoted)
            return s.substr(0, i);
    }
    return s;
}

Region default_region(const std::vector<Vec2>& vertices)
{
    double x0 = vertices.front().x, x1 = x0, y0 = vertices.front().y, y1 = y0;
    for (const auto& v : vertices) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    const double pad = std::max(x1 - x0, y1 - y0);
    return {x0 - pad, y0 - pad, x1 + pad, y1 + pad};
}

} // namespace

std::vector<double> AngleRange::radians() const
{
    std::vector<double> out;
    for (double d : uniform_grid(start_deg, stop_deg, step_deg))
        out.push_back(d * kDeg);
    return out;
}

Room ScenarioConfig::room() const
{
    std::vector<bool> reflective = room_reflective;
    if (reflective.empty())
        reflective.assign(room_vertices.size(), true);
    return Room::from_polygon(room_vertices, reflective);
}

std::vector<Vec2> ScenarioConfig::tx_positions() const
{
    const double lambda = grid.wavelength();
    std::vector<Vec2> out;
    for (const auto& a : tx_array)
        out.push_back(tx_ref + lambda * a);
    return out;
}

MeasurementPlan ScenarioConfig::plan() const
{
    const auto tx = tx_positions();
    if (!placements.empty()) {
        MeasurementPlan plan;
        plan.tx_ref = tx_ref;
        plan.rx_ref = rx_ref;
        for (const auto& rx : placements)
            plan.placements.push_back({tx, rx});
        return plan;
    }
    std::vector<double> spacings;
    for (double a : spacings_wavelengths)
        spacings.push_back(a * grid.wavelength());
    return plan_linear_track(rx_ref, offsets, spacings, tx_ref, tx);
}

DictionaryGrid ScenarioConfig::dictionary_angles() const
{
    DictionaryGrid g;
    g.aoa = aoa_grid.radians();
    g.aod = aod_grid.radians();
    return g;
}

double ScenarioConfig::heatmap_concentration() const
{
    if (concentration)
        return *concentration;
    const double sigma = 0.5 * kDeg;
    return 1.0 / (2.0 * sigma * sigma);
}

std::string ScenarioConfig::resolved_output_dir() const
{
    if (!output_dir.empty())
        return output_dir;
    if (const char* env = std::getenv("NFCM_OUTPUT_DIR"); env && *env)
        return env;
    return ".";
}

ScenarioConfig parse_scenario(std::string_view text)
{
    ScenarioConfig c;
    std::map<std::string, int> seen; // "section.key" -> line
    std::string section;
    int line_no = 0;
    int last_line = 1;
    bool any_content = false;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty())
            continue;
        any_content = true;
        last_line = line_no;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ParseError(ErrorCode::syntax, line_no, "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!schema().contains(section) || section.empty())
                throw ParseError(ErrorCode::unknown_key, line_no, "unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(ErrorCode::syntax, line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ParseError(ErrorCode::syntax, line_no, "missing key before '='");
        const auto& keys = schema().at(section);
        const auto handler = keys.find(key);
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (handler == keys.end())
            throw ParseError(ErrorCode::unknown_key, line_no, "unknown key '" + qualified + "'");
        if (const auto prev = seen.find(qualified); prev != seen.end())
            throw ParseError(ErrorCode::semantic, line_no,
                             "duplicate key '" + qualified + "' (first set on line " + std::to_string(prev->second) +
                                 ")");
        Entry entry{ValueParser(trim(line.substr(eq + 1)), line_no).parse_all(), line_no};
        handler->second(c, entry, key);
        seen[qualified] = line_no;
    }
    if (!any_content)
        throw ParseError(ErrorCode::syntax, 1, "empty scenario");

    auto line_of = [&](const std::string& key) {
        const auto it = seen.find(key);
        return it == seen.end() ? last_line : it->second;
    };
    auto require = [&](const std::string& key) {
        if (!seen.contains(key))
            semantic(last_line, "missing required key '" + key + "'");
    };
    require("room.vertices");
    require("transmitter.position");
    require("receiver.position");

    const bool explicit_plan = seen.contains("receiver.placements") && !c.placements.empty();
    if (explicit_plan) {
        if (seen.contains("receiver.offsets") || seen.contains("receiver.spacings_wavelengths"))
            semantic(line_of("receiver.placements"), "'placements' conflicts with 'offsets'/'spacings_wavelengths'");
    } else {
        require("receiver.offsets");
        require("receiver.spacings_wavelengths");
    }

    if (c.room_vertices.size() < 3)
        semantic(line_of("room.vertices"), "room needs at least 3 vertices");
    if (!c.room_reflective.empty() && c.room_reflective.size() != c.room_vertices.size())
        semantic(line_of("room.reflective"), "'reflective' needs one flag per wall");
    if (c.room_reflective.empty())
        c.room_reflective.assign(c.room_vertices.size(), true);

    Room room;
    try {
        room = c.room();
    } catch (const Error& e) {
        semantic(line_of("room.vertices"), e.what());
    }
    if (!room.contains(c.tx_ref))
        semantic(line_of("transmitter.position"), "transmitter lies outside the room");
    for (const auto& p : c.tx_positions())
        if (!room.contains(p))
            semantic(line_of("transmitter.array_wavelengths"), "transmitter element lies outside the room");
    if (!room.contains(c.rx_ref))
        semantic(line_of("receiver.position"), "receiver reference lies outside the room");
    const MeasurementPlan plan = c.plan();
    for (const auto& pl : plan.placements)
        for (const auto& p : pl.rx_positions)
            if (!room.contains(p))
                semantic(line_of(explicit_plan ? "receiver.placements" : "receiver.offsets"),
                         "receiver element lies outside the room");

    for (const auto& s : c.subsets)
        for (std::size_t k : s)
            if (k >= plan.measurement_count())
                semantic(line_of("estimation.subsets"), "subset index " + std::to_string(k) + " out of range");

    if (!seen.contains("heatmap.region"))
        c.region = default_region(c.room_vertices);
    return c;
}

std::string serialize_scenario(const ScenarioConfig& c)
{
    std::ostringstream out;
    out << "name = " << quote(c.name) << "\n\n";

    out << "[room]\n";
    out << "vertices = " << fmt_list(c.room_vertices, [](const Vec2& p) { return fmt(p); }) << "\n";
    out << "reflective = "
        << fmt_list(c.room_reflective, [](bool b) { return std::string(b ? "true" : "false"); }) << "\n";
    out << "reflection_loss = " << fmt(c.reflection_loss) << "\n";
    out << "max_order = " << c.max_order << "\n\n";

    out << "[transmitter]\n";
    out << "position = " << fmt(c.tx_ref) << "\n";
    out << "array_wavelengths = " << fmt_list(c.tx_array, [](const Vec2& p) { return fmt(p); }) << "\n\n";

    out << "[receiver]\n";
    out << "position = " << fmt(c.rx_ref) << "\n";
    if (!c.placements.empty()) {
        out << "placements = " << fmt_list(c.placements, [](const std::vector<Vec2>& pl) {
            return fmt_list(pl, [](const Vec2& p) { return fmt(p); });
        }) << "\n\n";
    } else {
        out << "offsets = " << fmt_list(c.offsets, [](double d) { return fmt(d); }) << "\n";
        out << "spacings_wavelengths = " << fmt_list(c.spacings_wavelengths, [](double d) { return fmt(d); })
            << "\n\n";
    }

    out << "[frequency]\n";
    out << "center = " << fmt(c.grid.center) << "\n";
    out << "bandwidth = " << fmt(c.grid.bandwidth) << "\n";
    out << "tones = " << c.grid.num_tones << "\n\n";

    out << "[simulation]\n";
    out << "snr_db = " << (c.snr_db ? fmt(*c.snr_db) : std::string("none")) << "\n";
    out << "coherent = " << (c.coherent ? "true" : "false") << "\n";
    out << "seed = " << c.seed << "\n\n";

    auto range = [](const AngleRange& r) {
        return "(" + fmt(r.start_deg) + ", " + fmt(r.stop_deg) + ", " + fmt(r.step_deg) + ")";
    };
    out << "[estimation]\n";
    out << "aoa_grid_deg = " << range(c.aoa_grid) << "\n";
    out << "aod_grid_deg = " << range(c.aod_grid) << "\n";
    out << "delay_step = " << (c.delay_step ? fmt(*c.delay_step) : std::string("auto")) << "\n";
    out << "support_db = " << fmt(c.support_db) << "\n";
    out << "l_max = " << c.l_max << "\n";
    out << "stop_fraction = " << fmt(c.stop_fraction) << "\n";
    out << "refine = " << (c.refine ? "true" : "false") << "\n";
    if (c.subsets.empty())
        out << "subsets = auto\n\n";
    else
        out << "subsets = " << fmt_list(c.subsets, [](const std::vector<std::size_t>& s) {
            return fmt_list(s, [](std::size_t k) { return std::to_string(k); });
        }) << "\n\n";

    out << "[heatmap]\n";
    out << "region = (" << fmt(c.region.x0) << ", " << fmt(c.region.y0) << ", " << fmt(c.region.x1) << ", "
        << fmt(c.region.y1) << ")\n";
    out << "cell = " << fmt(c.cell) << "\n";
    out << "concentration = " << (c.concentration ? fmt(*c.concentration) : std::string("auto")) << "\n";

    if (!c.output_dir.empty())
        out << "\n[output]\ndirectory = " << quote(c.output_dir) << "\n";
    return out.str();
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> out;
    for (const auto& [name, text] : presets())
        out.push_back(name);
    return out;
}

std::optional<std::string> preset_text(std::string_view name)
{
    const auto it = presets().find(name);
    if (it == presets().end())
        return std::nullopt;
    return it->second;
}

ScenarioConfig load_scenario(const std::string& path_or_preset)
{
    if (auto text = preset_text(path_or_preset))
        return parse_scenario(*text);
    std::ifstream in(path_or_preset, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open scenario '" + path_or_preset + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace nfrm
