#pragma once

// Run configuration files, the partition container format and the delimited
// summary tables written by the command-line tool.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "tsm/analysis.hpp"
#include "tsm/dynamics.hpp"
#include "tsm/errors.hpp"
#include "tsm/geometry.hpp"
#include "tsm/grid.hpp"
#include "tsm/tsm.hpp"
#include "tsm/viability.hpp"

namespace tsm {

// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::string model = "ays";  // ays | linear1d
    ays::Params params;
    // linear1d: x' = slope * x + offset on [lower, upper], desirable on the
    // open interval (desirable_lower, desirable_upper)
    double slope = -1.0;
    double offset = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    double desirable_lower = -std::numeric_limits<double>::infinity();
    double desirable_upper = std::numeric_limits<double>::infinity();

    std::size_t resolution = 80;
    double dt = 0.0;  // 0: 1.5 x grid spacing
    double epsilon = 1e-4;
    double lipschitz = 10.0;
    std::vector<std::string> controls;  // empty: all
    ExpansionMode expansion = ExpansionMode::kGuaranteed;
    CacheMode cache = CacheMode::kAuto;
    std::uint64_t seed = 1;

    // Not part of the echo: they do not change results.
    unsigned workers = 0;  // 0: hardware concurrency
    std::string out;
    std::string summary;

    unsigned effective_workers() const { return workers == 0 ? default_workers() : workers; }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string& text, int line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    std::string lowered;
    for (char c : text) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lowered == "inf" || lowered == "+inf") return std::numeric_limits<double>::infinity();
    if (lowered == "-inf") return -std::numeric_limits<double>::infinity();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || std::isnan(v))
        throw ConfigError("expected a number, got '" + text + "'", line);
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& text, int line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("expected a nonnegative integer, got '" + text + "'", line);
    return v;
}

struct ConfigKey {
    const char* name;
    std::function<void(RunConfig&, const std::string&, int)> set;
    std::function<std::string(const RunConfig&)> get;  // null: not echoed
};

inline double positive(double v, const char* key, int line) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive and finite", line);
    return v;
}

inline const std::vector<ConfigKey>& config_keys() {
    using P = ays::Params;
    auto param = [](const char* name, double P::*field) {
        return ConfigKey{name,
                         [name, field](RunConfig& c, const std::string& v, int line) {
                             c.params.*field = positive(parse_number(v, line), name, line);
                         },
                         [field](const RunConfig& c) { return format_double(c.params.*field); }};
    };
    auto real = [](const char* name, double RunConfig::*field, bool finite) {
        return ConfigKey{name,
                         [name, field, finite](RunConfig& c, const std::string& v, int line) {
                             const double x = parse_number(v, line);
                             if (finite && !std::isfinite(x))
                                 throw ConfigError(std::string(name) + " must be finite", line);
                             c.*field = x;
                         },
                         [field](const RunConfig& c) { return format_double(c.*field); }};
    };
    static const std::vector<ConfigKey> keys = {
        {"model",
         [](RunConfig& c, const std::string& v, int line) {
             if (v != "ays" && v != "linear1d") throw ConfigError("model must be ays or linear1d", line);
             c.model = v;
         },
         [](const RunConfig& c) { return c.model; }},
        param("tau_A", &P::tau_A),
        param("tau_S", &P::tau_S),
        param("beta", &P::beta),
        param("beta_lg", &P::beta_lg),
        param("theta", &P::theta),
        param("epsilon_energy", &P::epsilon_energy),
        param("phi", &P::phi),
        param("sigma", &P::sigma),
        param("sigma_et", &P::sigma_et),
        param("rho", &P::rho),
        param("A_mid", &P::A_mid),
        param("Y_mid", &P::Y_mid),
        param("S_mid", &P::S_mid),
        param("A_PB", &P::A_PB),
        param("Y_SF", &P::Y_SF),
        real("slope", &RunConfig::slope, true),
        real("offset", &RunConfig::offset, true),
        real("lower", &RunConfig::lower, true),
        real("upper", &RunConfig::upper, true),
        real("desirable_lower", &RunConfig::desirable_lower, false),
        real("desirable_upper", &RunConfig::desirable_upper, false),
        {"resolution",
         [](RunConfig& c, const std::string& v, int line) {
             const auto n = parse_unsigned(v, line);
             if (n < 2 || n > 4096) throw ConfigError("resolution must be in [2, 4096]", line);
             c.resolution = n;
         },
         [](const RunConfig& c) { return std::to_string(c.resolution); }},
        {"dt",
         [](RunConfig& c, const std::string& v, int line) {
             const double x = parse_number(v, line);
             if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("dt must be nonnegative (0 = default)", line);
             c.dt = x;
         },
         [](const RunConfig& c) { return format_double(c.dt); }},
        {"epsilon",
         [](RunConfig& c, const std::string& v, int line) {
             c.epsilon = positive(parse_number(v, line), "epsilon", line);
         },
         [](const RunConfig& c) { return format_double(c.epsilon); }},
        {"lipschitz",
         [](RunConfig& c, const std::string& v, int line) {
             const double x = parse_number(v, line);
             if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("lipschitz must be nonnegative", line);
             c.lipschitz = x;
         },
         [](const RunConfig& c) { return format_double(c.lipschitz); }},
        {"controls",
         [](RunConfig& c, const std::string& v, int line) {
             c.controls.clear();
             if (v == "all") return;
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 item = trim(item);
                 if (item.empty()) throw ConfigError("empty control name in list", line);
                 c.controls.push_back(item);
             }
             if (c.controls.empty()) throw ConfigError("control list must not be empty", line);
         },
         [](const RunConfig& c) {
             if (c.controls.empty()) return std::string("all");
             std::string s;
             for (const auto& n : c.controls) s += (s.empty() ? "" : ",") + n;
             return s;
         }},
        {"expansion",
         [](RunConfig& c, const std::string& v, int line) {
             if (v == "guaranteed")
                 c.expansion = ExpansionMode::kGuaranteed;
             else if (v == "strict")
                 c.expansion = ExpansionMode::kStrict;
             else
                 throw ConfigError("expansion must be guaranteed or strict", line);
         },
         [](const RunConfig& c) { return std::string(to_string(c.expansion)); }},
        {"cache",
         [](RunConfig& c, const std::string& v, int line) {
             if (v == "auto")
                 c.cache = CacheMode::kAuto;
             else if (v == "on")
                 c.cache = CacheMode::kOn;
             else if (v == "off")
                 c.cache = CacheMode::kOff;
             else
                 throw ConfigError("cache must be auto, on or off", line);
         },
         nullptr},
        {"seed", [](RunConfig& c, const std::string& v, int line) { c.seed = parse_unsigned(v, line); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"workers",
         [](RunConfig& c, const std::string& v, int line) {
             const auto n = parse_unsigned(v, line);
             if (n > 1024) throw ConfigError("workers must be at most 1024", line);
             c.workers = static_cast<unsigned>(n);
         },
         nullptr},
        {"out", [](RunConfig& c, const std::string& v, int) { c.out = v; }, nullptr},
        {"summary", [](RunConfig& c, const std::string& v, int) { c.summary = v; }, nullptr},
    };
    return keys;
}

}  // namespace detail

// Applies one `key = value` assignment.  `line` is used in error messages.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value, int line = 0) {
    for (const auto& k : detail::config_keys())
        if (key == k.name) {
            k.set(c, value, line);
            return;
        }
    throw ConfigError("unknown key '" + key + "'", line);
}

inline void validate(const RunConfig& c) {
    if (c.model == "linear1d") {
        if (!(c.lower < c.upper)) throw ConfigError("lower must be smaller than upper");
        if (!(c.desirable_lower < c.desirable_upper))
            throw ConfigError("desirable_lower must be smaller than desirable_upper");
    }
}

// Flat `key = value` lines; `#` starts a comment; blank lines are ignored.
inline RunConfig parse_config(std::istream& in) {
    RunConfig c;
    std::string raw;
    int line = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key", line);
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line);
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")",
                              line);
        seen[key] = line;
        set_config_value(c, key, value, line);
    }
    validate(c);
    return c;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_config(in);
}

// Canonical echo of every result-relevant field, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : detail::config_keys())
        if (k.get) out.emplace_back(k.name, k.get(c));
    return out;
}

inline std::uint64_t config_hash(const RunConfig& c) {
    std::string text;
    for (const auto& [k, v] : config_echo(c)) text += k + " = " + v + "\n";
    return fnv1a64(text);
}

// ---------------------------------------------------------------------------
// Model construction from a configuration

struct ModelSetup {
    ControlledSystem system;
    GridPtr grid;
    DiscreteDynamics dynamics;
    PointSet desirable;
    ControlSubset controls;
    std::optional<CompactMap> map;  // set for compactified models
    std::vector<std::string> axes;
};

inline ControlSubset resolve_controls(const ControlledSystem& sys, const std::vector<std::string>& names) {
    if (names.empty()) return sys.all_controls();
    ControlSubset out;
    for (const auto& n : names) {
        ControlIndex u = 0;
        try {
            u = sys.control_index(n);
        } catch (const UsageError&) {
            throw ConfigError("unknown control '" + n + "'");
        }
        if (std::find(out.begin(), out.end(), u) != out.end()) throw ConfigError("control '" + n + "' listed twice");
        out.push_back(u);
    }
    return out;
}

inline AysRunSettings ays_settings(const RunConfig& c) {
    AysRunSettings s;
    s.params = c.params;
    s.resolution = c.resolution;
    s.dt = c.dt;
    s.epsilon = c.epsilon;
    s.lipschitz = c.lipschitz;
    s.mode = c.expansion;
    s.cache = c.cache;
    s.workers = c.effective_workers();
    return s;
}

inline ModelSetup build_model(const RunConfig& c) {
    validate(c);
    if (c.model == "ays") {
        AysRunSettings s = ays_settings(c);
        s.controls = resolve_controls(ays::make_system(c.params), c.controls);
        AysSetup a = make_ays_setup(s);
        return ModelSetup{a.system, a.grid, std::move(a.dynamics), std::move(a.desirable), a.controls,
                          c.params.compact_map(), {"a", "y", "s"}};
    }
    const double slope = c.slope, offset = c.offset;
    ControlledSystem raw(1, {"default"}, 0, [slope, offset](const StateVector& x, ControlIndex) {
        return StateVector{slope * x[0] + offset};
    });
    ControlledSystem sys = homogenize(raw, c.epsilon).as_system();
    GridPtr grid = make_grid(Grid({c.lower}, {c.upper}, {c.resolution}));
    const double dt = c.dt > 0.0 ? c.dt : 1.5 * grid->min_spacing();
    DiscreteDynamics dyn(sys, grid, SuccessorConfig::make(*grid, dt, 1.0, c.lipschitz, c.expansion), c.cache,
                         c.effective_workers());
    const double lo = c.desirable_lower, hi = c.desirable_upper;
    PointSet desirable = PointSet::from_predicate(grid, [&](const StateVector& x) { return x[0] > lo && x[0] < hi; });
    ControlSubset controls = resolve_controls(sys, c.controls);
    return ModelSetup{sys, grid, std::move(dyn), std::move(desirable), controls, std::nullopt, {"x"}};
}

// ---------------------------------------------------------------------------
// Partition container
//
//   TSMPART1
//   dimension <n>
//   axes <name> ...
//   lower <v> ...
//   upper <v> ...
//   resolution <k> ...
//   config_hash <16 hex digits>
//   config <count>
//   <key> = <value>            (count lines)
//   codes <count>
//   <code> <name>              (count lines)
//   metadata <count>
//   <key>=<value>              (count lines)
//   payload <bytes>
//   <bytes raw label codes, row-major, last axis fastest>
//   <8 bytes FNV-1a 64 of the payload, little-endian>

inline constexpr std::string_view kPartitionMagic = "TSMPART1";

struct PartitionFile {
    std::vector<std::string> axes;
    StateVector lower{0.0}, upper{1.0};
    std::vector<std::size_t> resolution;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> codes;
    std::map<std::string, std::string> metadata;
    std::vector<std::uint8_t> payload;

    std::size_t dimension() const noexcept { return resolution.size(); }
    Grid grid() const { return Grid(lower, upper, resolution); }
    std::uint64_t checksum() const { return fnv1a64(payload); }
};

namespace detail {
inline void check_field(const std::string& s, const char* what) {
    if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos)
        throw UsageError(std::string(what) + " must not contain line breaks");
}

template <class T>
std::string join(const T& items) {
    std::string s;
    for (const auto& x : items) {
        if (!s.empty()) s += ' ';
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>)
            s += format_double(x);
        else if constexpr (std::is_arithmetic_v<std::decay_t<decltype(x)>>)
            s += std::to_string(x);
        else
            s += x;
    }
    return s;
}
}  // namespace detail

inline std::string serialize(const PartitionFile& f) {
    const std::size_t n = f.dimension();
    if (n == 0 || f.axes.size() != n || f.lower.size() != n || f.upper.size() != n)
        throw UsageError("partition file dimension fields disagree");
    std::size_t expected = 1;
    for (auto k : f.resolution) expected *= k;
    if (f.payload.size() != expected) throw UsageError("payload length differs from the lattice size");
    if (f.codes.empty() || f.codes.size() > 256) throw UsageError("code table must have 1 to 256 entries");
    for (auto b : f.payload)
        if (b >= f.codes.size()) throw UsageError("payload holds a code outside the code table");

    std::string out;
    out += std::string(kPartitionMagic) + "\n";
    out += "dimension " + std::to_string(n) + "\n";
    for (const auto& a : f.axes)
        if (a.empty() || a.find_first_of(" \t\n") != std::string::npos) throw UsageError("axis names must be words");
    out += "axes " + detail::join(f.axes) + "\n";
    out += "lower " + detail::join(f.lower) + "\n";
    out += "upper " + detail::join(f.upper) + "\n";
    out += "resolution " + detail::join(f.resolution) + "\n";
    std::string echo;
    for (const auto& [k, v] : f.config) {
        detail::check_field(k + v, "config entries");
        echo += k + " = " + v + "\n";
    }
    out += "config_hash " + hex64(fnv1a64(echo)) + "\n";
    out += "config " + std::to_string(f.config.size()) + "\n" + echo;
    out += "codes " + std::to_string(f.codes.size()) + "\n";
    for (std::size_t i = 0; i < f.codes.size(); ++i) {
        detail::check_field(f.codes[i], "code names");
        out += std::to_string(i) + " " + f.codes[i] + "\n";
    }
    out += "metadata " + std::to_string(f.metadata.size()) + "\n";
    for (const auto& [k, v] : f.metadata) {
        detail::check_field(k + v, "metadata entries");
        if (k.find('=') != std::string::npos) throw UsageError("metadata keys must not contain '='");
        out += k + "=" + v + "\n";
    }
    out += "payload " + std::to_string(f.payload.size()) + "\n";
    out.append(reinterpret_cast<const char*>(f.payload.data()), f.payload.size());
    const std::uint64_t sum = f.checksum();
    for (int i = 0; i < 8; ++i) out += static_cast<char>((sum >> (8 * i)) & 0xff);
    return out;
}

inline PartitionFile deserialize(const std::string& data) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) throw IoError("truncated partition header");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    auto field = [&](const char* name) -> std::vector<std::string> {
        std::istringstream ss(next_line());
        std::string tag;
        ss >> tag;
        if (tag != name) throw IoError(std::string("expected '") + name + "' in partition header");
        std::vector<std::string> items;
        for (std::string s; ss >> s;) items.push_back(s);
        return items;
    };
    auto to_size = [](const std::string& s) {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw IoError("bad integer '" + s + "' in partition header");
        return v;
    };
    auto to_double = [](const std::string& s) {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw IoError("bad number '" + s + "' in partition header");
        return v;
    };
    auto single = [&](const char* name) {
        auto v = field(name);
        if (v.size() != 1) throw IoError(std::string("malformed '") + name + "' line");
        return to_size(v[0]);
    };

    if (next_line() != kPartitionMagic) throw IoError("not a partition file (bad magic)");
    PartitionFile f;
    const std::size_t n = single("dimension");
    if (n == 0 || n > kMaxDimension) throw IoError("unsupported dimension in partition file");
    f.axes = field("axes");
    auto lo = field("lower");
    auto hi = field("upper");
    auto res = field("resolution");
    if (f.axes.size() != n || lo.size() != n || hi.size() != n || res.size() != n)
        throw IoError("partition header fields disagree with the dimension");
    f.lower = StateVector(n);
    f.upper = StateVector(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.lower[i] = to_double(lo[i]);
        f.upper[i] = to_double(hi[i]);
        f.resolution.push_back(to_size(res[i]));
    }
    auto hash = field("config_hash");
    if (hash.size() != 1) throw IoError("malformed config_hash line");
    const std::size_t config_count = single("config");
    std::string echo;
    for (std::size_t i = 0; i < config_count; ++i) {
        const std::string line = next_line();
        const auto sep = line.find(" = ");
        if (sep == std::string::npos) throw IoError("malformed config echo line");
        f.config.emplace_back(line.substr(0, sep), line.substr(sep + 3));
        echo += line + "\n";
    }
    if (hex64(fnv1a64(echo)) != hash[0]) throw IoError("config echo does not match its hash");
    const std::size_t code_count = single("codes");
    if (code_count == 0 || code_count > 256) throw IoError("bad code table size");
    for (std::size_t i = 0; i < code_count; ++i) {
        const std::string line = next_line();
        const auto sp = line.find(' ');
        if (sp == std::string::npos || to_size(line.substr(0, sp)) != i) throw IoError("malformed code table");
        f.codes.push_back(line.substr(sp + 1));
    }
    const std::size_t meta_count = single("metadata");
    for (std::size_t i = 0; i < meta_count; ++i) {
        const std::string line = next_line();
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("malformed metadata line");
        f.metadata[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const std::size_t bytes = single("payload");
    std::size_t expected = 1;
    for (auto k : f.resolution) expected *= k;
    if (bytes != expected) throw IoError("payload length differs from the lattice size");
    if (data.size() != pos + bytes + 8) throw IoError("partition file has the wrong length");
    f.payload.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + bytes));
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i)
        stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + bytes + i])) << (8 * i);
    if (stored != f.checksum()) throw IoError("partition payload checksum mismatch");
    for (auto b : f.payload)
        if (b >= f.codes.size()) throw IoError("payload holds a code outside the code table");
    return f;
}

// Writes to a sibling temporary file and renames it into place, so a failed
// write never leaves a truncated file at `path`.
inline void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_partition_file(const std::string& path, const PartitionFile& f) {
    write_file_atomic(path, serialize(f));
}

inline PartitionFile read_partition_file(const std::string& path) { return deserialize(read_file(path)); }

inline PartitionFile make_partition_file(const TsmResult& r, const std::vector<std::string>& axes,
                                         std::vector<std::pair<std::string, std::string>> config) {
    const Grid& g = r.labels.grid();
    PartitionFile f;
    f.axes = axes;
    f.lower = g.lower();
    f.upper = g.upper();
    f.resolution = g.points_per_axis();
    f.config = std::move(config);
    for (auto name : kRegionNames) f.codes.emplace_back(name);
    f.metadata = r.metadata;
    f.payload.reserve(r.labels.size());
    for (RegionLabel l : r.labels.values()) f.payload.push_back(static_cast<std::uint8_t>(l));
    return f;
}

// Point sets use the same container with the code table {out, in}.
inline PartitionFile make_set_file(const PointSet& s, const std::vector<std::string>& axes,
                                   std::vector<std::pair<std::string, std::string>> config,
                                   std::map<std::string, std::string> metadata) {
    const Grid& g = s.grid();
    PartitionFile f;
    f.axes = axes;
    f.lower = g.lower();
    f.upper = g.upper();
    f.resolution = g.points_per_axis();
    f.config = std::move(config);
    f.codes = {"out", "in"};
    f.metadata = std::move(metadata);
    f.payload.resize(g.size(), 0);
    s.for_each([&](LatticeIndex i) { f.payload[i] = 1; });
    return f;
}

inline TsmResult to_tsm_result(const PartitionFile& f) {
    if (f.codes.size() != kRegionCount) throw IoError("file does not hold a region partition");
    for (std::size_t i = 0; i < kRegionCount; ++i)
        if (f.codes[i] != kRegionNames[i]) throw IoError("unexpected region code table");
    TsmResult r{LabelArray<RegionLabel>(make_grid(f.grid()), RegionLabel::Trench), {}, f.metadata, {}, {}};
    for (std::size_t i = 0; i < f.payload.size(); ++i) r.labels[i] = static_cast<RegionLabel>(f.payload[i]);
    r.counts = count_labels(r.labels);
    return r;
}

inline RunConfig config_from_echo(const std::vector<std::pair<std::string, std::string>>& echo) {
    RunConfig c;
    for (const auto& [k, v] : echo) set_config_value(c, k, v);
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------
// Delimited tables

inline std::string summary_csv(const TsmResult& r, std::uint64_t hash, double wall_seconds) {
    std::ostringstream out;
    out << "# config_hash=" << hex64(hash) << "\n";
    out << "# wall_time_s=" << format_double(wall_seconds) << "\n";
    for (const auto& [k, v] : r.metadata)
        if (k.rfind("iterations.", 0) == 0 || k == "downstream_unnamed_points") out << "# " << k << "=" << v << "\n";
    out << "region,code,count,fraction\n";
    const auto frac = relative_volumes(r);
    for (std::size_t i = 0; i < kRegionCount; ++i)
        out << kRegionNames[i] << "," << i << "," << r.counts[i] << "," << format_double(frac[i]) << "\n";
    return out.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, SweepParameter param, std::uint64_t hash) {
    std::ostringstream out;
    out << "# config_hash=" << hex64(hash) << "\n";
    out << "# parameter=" << to_string(param) << "\n";
    out << to_string(param) << ",ok";
    for (auto name : kRegionNames) out << "," << name;
    out << ",error\n";
    for (const auto& row : rows) {
        out << format_double(row.value) << "," << (row.ok ? 1 : 0);
        for (double f : row.fractions) out << "," << format_double(f);
        std::string err = row.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        out << "," << err << "\n";
    }
    return out.str();
}

}  // namespace tsm
