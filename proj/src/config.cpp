#include "relaysim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "relaysim/errors.hpp"

namespace relaysim {

namespace {

// Minimal TOML reader covering the scenario schema: one-level [sections],
// key = value lines, values being strings, numbers, booleans or flat arrays.
struct TomlValue {
    enum class Kind { String, Number, Bool, Array };
    Kind kind = Kind::String;
    std::string str;
    double num = 0.0;
    bool is_int = false;
    bool boolean = false;
    std::vector<TomlValue> items;
    int line = 0;
};

struct TomlEntry {
    std::string key;
    TomlValue value;
    int line = 0;
    bool consumed = false;
};

using TomlTable = std::map<std::string, std::vector<TomlEntry>>;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_bare_key(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    }
    return true;
}

TomlValue parse_scalar(const std::string& raw, int line) {
    TomlValue v;
    v.line = line;
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("missing value", line);
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string", line);
        v.kind = TomlValue::Kind::String;
        v.str = s.substr(1, s.size() - 2);
        if (v.str.find('"') != std::string::npos) {
            throw ConfigError("escaped quotes are not supported", line);
        }
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = TomlValue::Kind::Bool;
        v.boolean = (s == "true");
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(s.c_str(), &end);
    if (end == nullptr || *end != '\0') {
        throw ConfigError("cannot parse value '" + s + "'", line);
    }
    v.kind = TomlValue::Kind::Number;
    v.is_int = s.find_first_of(".eE") == std::string::npos;
    return v;
}

TomlValue parse_value(const std::string& raw, int line) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated array", line);
        TomlValue v;
        v.kind = TomlValue::Kind::Array;
        v.line = line;
        const std::string inner = s.substr(1, s.size() - 2);
        std::string item;
        bool in_string = false;
        auto flush = [&]() {
            const std::string t = trim(item);
            if (!t.empty()) v.items.push_back(parse_scalar(t, line));
            item.clear();
        };
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                flush();
            } else {
                item += c;
            }
        }
        if (in_string) throw ConfigError("unterminated string in array", line);
        flush();
        return v;
    }
    return parse_scalar(s, line);
}

// Strips a trailing comment outside of quotes.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_bare_key(section)) throw ConfigError("malformed section name", line);
            table.try_emplace(section);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(s.substr(0, eq));
        if (!valid_bare_key(key)) throw ConfigError("malformed key '" + key + "'", line);
        if (section.empty()) {
            throw ConfigError("key '" + key + "' outside any [section]", line);
        }
        TomlEntry entry;
        entry.key = key;
        entry.line = line;
        entry.value = parse_value(s.substr(eq + 1), line);
        table[section].push_back(std::move(entry));
    }
    return table;
}

// ---- schema application ----

class SectionReader {
public:
    SectionReader(TomlTable& table, const std::string& name) : name_(name) {
        auto it = table.find(name);
        entries_ = (it == table.end()) ? nullptr : &it->second;
    }

    bool present() const { return entries_ != nullptr; }

    TomlEntry* find(const std::string& key) {
        if (entries_ == nullptr) return nullptr;
        for (auto& e : *entries_) {
            if (e.key == key) {
                e.consumed = true;
                return &e;
            }
        }
        return nullptr;
    }

    void reject_unknown() const {
        if (entries_ == nullptr) return;
        for (const auto& e : *entries_) {
            if (!e.consumed) {
                throw ConfigError("unknown key '" + e.key + "' in [" + name_ + "]", e.line);
            }
        }
    }

    double number(const std::string& key, double fallback) {
        TomlEntry* e = find(key);
        if (e == nullptr) return fallback;
        if (e->value.kind != TomlValue::Kind::Number) {
            throw ConfigError("'" + key + "' must be a number", e->line);
        }
        return e->value.num;
    }

    long integer(const std::string& key, long fallback) {
        TomlEntry* e = find(key);
        if (e == nullptr) return fallback;
        if (e->value.kind != TomlValue::Kind::Number || !e->value.is_int) {
            throw ConfigError("'" + key + "' must be an integer", e->line);
        }
        return static_cast<long>(e->value.num);
    }

    std::string text(const std::string& key, const std::string& fallback) {
        TomlEntry* e = find(key);
        if (e == nullptr) return fallback;
        if (e->value.kind != TomlValue::Kind::String) {
            throw ConfigError("'" + key + "' must be a string", e->line);
        }
        return e->value.str;
    }

    std::vector<double> number_array(const std::string& key, std::vector<double> fallback) {
        TomlEntry* e = find(key);
        if (e == nullptr) return fallback;
        if (e->value.kind != TomlValue::Kind::Array) {
            throw ConfigError("'" + key + "' must be an array", e->line);
        }
        std::vector<double> out;
        for (const auto& item : e->value.items) {
            if (item.kind != TomlValue::Kind::Number) {
                throw ConfigError("'" + key + "' must contain numbers", e->line);
            }
            out.push_back(item.num);
        }
        return out;
    }

    std::vector<std::string> string_array(const std::string& key) {
        TomlEntry* e = find(key);
        if (e == nullptr) return {};
        if (e->value.kind != TomlValue::Kind::Array) {
            throw ConfigError("'" + key + "' must be an array", e->line);
        }
        std::vector<std::string> out;
        for (const auto& item : e->value.items) {
            if (item.kind != TomlValue::Kind::String) {
                throw ConfigError("'" + key + "' must contain strings", e->line);
            }
            out.push_back(item.str);
        }
        return out;
    }

    int line() const {
        return (entries_ != nullptr && !entries_->empty()) ? entries_->front().line : 0;
    }

private:
    std::string name_;
    std::vector<TomlEntry>* entries_;
};

std::vector<StrategySpec> parse_strategies(SectionReader& sec, const std::string& key,
                                           std::vector<StrategySpec> fallback) {
    TomlEntry* e = sec.find(key);
    if (e == nullptr) return fallback;
    if (e->value.kind != TomlValue::Kind::Array) {
        throw ConfigError("'" + key + "' must be an array of strategy names", e->line);
    }
    std::vector<StrategySpec> out;
    for (const auto& item : e->value.items) {
        if (item.kind != TomlValue::Kind::String) {
            throw ConfigError("'" + key + "' must contain strings", e->line);
        }
        try {
            out.push_back(StrategySpec::parse(item.str));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what(), e->line);
        }
    }
    if (out.empty()) throw ConfigError("'" + key + "' must not be empty", e->line);
    return out;
}

const std::set<std::string> kKnownChecks = {
    "fixed_point", "grid_shape",  "threshold_order", "value_upper_bound",
    "oracle",      "dominance",   "stopping_bound",  "closed_form"};

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    TomlTable table = parse_toml(text);
    for (const auto& [name, entries] : table) {
        (void)entries;
        if (name != "system" && name != "solve" && name != "ber" && name != "efficiency" &&
            name != "objective" && name != "validate") {
            throw ConfigError("unknown section [" + name + "]",
                              entries.empty() ? 0 : entries.front().line);
        }
    }

    ScenarioConfig cfg;
    SectionReader system(table, "system");
    cfg.params.num_relays = static_cast<int>(system.integer("n_relays", cfg.params.num_relays));
    cfg.params.tau = system.number("tau", cfg.params.tau);
    cfg.params.power_ratio = system.number("power_ratio", cfg.params.power_ratio);
    cfg.params.q1 = system.number("q1", cfg.params.q1);
    cfg.params.q2 = system.number("q2", cfg.params.q2);
    cfg.params.trials = system.integer("trials", cfg.params.trials);
    cfg.params.seed = static_cast<std::uint64_t>(
        system.integer("seed", static_cast<long>(cfg.params.seed)));
    cfg.params.gamma_db_list = system.number_array("gamma_db", cfg.params.gamma_db_list);
    const std::string mod = system.text("modulation", "bpsk");
    try {
        cfg.params.modulation = modulation_from_name(mod);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), system.line());
    }
    cfg.workers = static_cast<int>(system.integer("workers", cfg.workers));
    system.reject_unknown();

    SectionReader solve(table, "solve");
    cfg.policy_path = solve.text("out", cfg.policy_path);
    cfg.grid_points = static_cast<int>(solve.integer("grid_points", cfg.grid_points));
    if (cfg.grid_points < 16) throw ConfigError("grid_points must be >= 16", solve.line());
    solve.reject_unknown();

    SectionReader ber(table, "ber");
    if (ber.present()) {
        ScenarioConfig::BerBlock block;
        block.strategies = parse_strategies(ber, "strategies", {});
        if (block.strategies.empty()) {
            throw ConfigError("[ber] needs a strategies array", ber.line());
        }
        block.out = ber.text("out", block.out);
        const auto window = ber.number_array("slope_window_db", {});
        if (!window.empty()) {
            if (window.size() != 2 || !(window[0] < window[1])) {
                throw ConfigError("slope_window_db must be [lo, hi] with lo < hi", ber.line());
            }
            block.slope_window_db = {window[0], window[1]};
        }
        cfg.ber = std::move(block);
        ber.reject_unknown();
    }

    SectionReader eff(table, "efficiency");
    if (eff.present()) {
        ScenarioConfig::EfficiencyBlock block;
        block.strategies = parse_strategies(eff, "strategies", {});
        if (block.strategies.empty()) {
            throw ConfigError("[efficiency] needs a strategies array", eff.line());
        }
        const auto ns = eff.number_array("n_list", {});
        if (ns.empty()) throw ConfigError("[efficiency] needs an n_list array", eff.line());
        for (double v : ns) {
            if (v < 1 || v != static_cast<long>(v)) {
                throw ConfigError("n_list entries must be positive integers", eff.line());
            }
            block.n_list.push_back(static_cast<int>(v));
        }
        block.gamma_db = eff.number("gamma_db", block.gamma_db);
        block.out = eff.text("out", block.out);
        cfg.efficiency = std::move(block);
        eff.reject_unknown();
    }

    SectionReader obj(table, "objective");
    if (obj.present()) {
        ScenarioConfig::ObjectiveBlock block;
        block.strategies = parse_strategies(obj, "strategies", {});
        if (block.strategies.empty()) {
            throw ConfigError("[objective] needs a strategies array", obj.line());
        }
        block.out = obj.text("out", block.out);
        cfg.objective = std::move(block);
        obj.reject_unknown();
    }

    SectionReader val(table, "validate");
    cfg.validate.trials = val.integer("trials", cfg.validate.trials);
    if (cfg.validate.trials < 100) {
        throw ConfigError("[validate] trials must be >= 100", val.line());
    }
    cfg.validate.checks = val.string_array("checks");
    for (const auto& c : cfg.validate.checks) {
        if (kKnownChecks.count(c) == 0) {
            throw ConfigError("unknown validation check '" + c + "'", val.line());
        }
    }
    val.reject_unknown();

    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("invalid scenario: ") + ex.what(), 0);
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open scenario file '" + path + "'", 0);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace relaysim
