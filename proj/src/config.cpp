#include "bcva/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bcva/errors.hpp"

namespace bcva {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    const std::string s = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ConfigError("key " + key + ": '" + text + "' is not a number");
    return v;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

KeyValueConfig KeyValueConfig::defaults()
{
    KeyValueConfig c;
    c.values_ = {
        // limiting portfolio
        {"limit.alpha_star", "0.01"},
        {"limit.kappa_star", "0.5"},
        {"limit.sigma_star", "0.3"},
        {"limit.c_star", "0.1"},
        {"limit.d_star", "0.1"},
        {"limit.lambda_hat_star", "0.2"},
        {"limit.x_star", "0.02"},
        {"limit.s_z", "0.02"},
        {"limit.l_z", "0.4"},
        {"limit.r", "0.03"},
        {"limit.rho", "0.5"},
        // jump laws
        {"jumps.gamma1", "2"},
        {"jumps.gamma2", "2"},
        {"jumps.lambda_c", "0.2"},
        {"jumps.gamma_a", "1.5"},
        {"jumps.gamma_b", "1.5"},
        {"jumps.gamma_ab", "0"},
        {"jumps.gamma_tilde_a", "1.5"},
        {"jumps.gamma_tilde_b", "1.5"},
        {"jumps.gamma_tilde_ab", "0"},
        // counterparties
        {"counterparty.alpha_a", "0.4"},
        {"counterparty.kappa_a", "0.6"},
        {"counterparty.sigma_a", "0.3"},
        {"counterparty.c_a", "0.3"},
        {"counterparty.d_a", "0.3"},
        {"counterparty.lambda_hat_a", "0.4"},
        {"counterparty.xi0_a", "0.2"},
        {"counterparty.alpha_b", "0.4"},
        {"counterparty.kappa_b", "0.6"},
        {"counterparty.sigma_b", "0.3"},
        {"counterparty.c_b", "0.3"},
        {"counterparty.d_b", "0.3"},
        {"counterparty.lambda_hat_b", "0.4"},
        {"counterparty.xi0_b", "0.2"},
        {"counterparty.rho_hat", "0.5"},
        {"counterparty.loss_a", "0.4"},
        {"counterparty.loss_b", "0.4"},
        // experiment
        {"experiment.horizon", "3"},
        {"experiment.valuation_time", "0"},
        {"experiment.k_list", "300"},
        {"experiment.paths", "2000"},
        {"experiment.dt", "0"},
        {"experiment.curve_points", "61"},
        {"experiment.repetitions", "1"},
        {"experiment.theta", "-1"},
        {"experiment.sweep_parameter", "sigma_star"},
        {"experiment.sweep_values", "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.6,0.7,0.8,0.9,1.0"},
        {"experiment.kernel_intervals", "512"},
        {"experiment.kernel_paths", "100000"},
        {"experiment.limit_paths", "100000"},
        {"experiment.cva_paths", "100000"},
        {"experiment.bve_samples", "1000000"},
        {"experiment.oracle_dt", "0.001"},
        {"experiment.inject_fault", ""},
    };
    return c;
}

void KeyValueConfig::load_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    load_text(ss.str(), path);
}

void KeyValueConfig::load_text(const std::string& text, const std::string& source)
{
    std::stringstream ss(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(ss, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(no) + ": expected 'section.key = value'");
        try {
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(no) + ": " + e.what());
        }
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value)
{
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = trim(value);
}

void KeyValueConfig::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void KeyValueConfig::apply_env(const std::map<std::string, std::string>& env)
{
    for (const auto& [name, value] : env) {
        const std::string key = env_name_to_key(name);
        if (!key.empty()) set(key, value);
    }
}

const std::string& KeyValueConfig::get_string(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const
{
    return parse_double(key, get_string(key));
}

std::size_t KeyValueConfig::get_size(const std::string& key) const
{
    const double v = get_double(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
        throw ConfigError("key " + key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const
{
    std::vector<double> out;
    for (const auto& item : split_list(get_string(key))) out.push_back(parse_double(key, item));
    return out;
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const
{
    std::vector<std::size_t> out;
    for (double v : get_doubles(key)) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("key " + key + ": expected positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string KeyValueConfig::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::string KeyValueConfig::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string env_name_to_key(const std::string& env_name)
{
    const std::string prefix = env_override_prefix;
    if (env_name.rfind(prefix, 0) != 0) return "";
    std::string rest = env_name.substr(prefix.size());
    const auto sep = rest.find("__");
    if (sep == std::string::npos) return "";
    std::string key = rest.substr(0, sep) + "." + rest.substr(sep + 2);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    return key;
}

} // namespace bcva
