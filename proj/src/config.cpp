#include "ebsim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "ebsim/dataset_io.hpp"
#include "ebsim/error.hpp"

namespace ebsim::config {

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const char* first = v.data();
    if (!v.empty() && v.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || std::isnan(out)) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

int to_sign(const std::string& key, const std::string& v) {
    if (v == "+1" || v == "1" || v == "+") return 1;
    if (v == "-1" || v == "-") return -1;
    throw ConfigError(key, "expected +1 or -1, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

std::string real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return io::format_real(v);
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + real(v[i]);
    return s;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
std::string opt(const std::optional<T>& v, const std::function<std::string(const T&)>& f) {
    return v ? f(*v) : std::string("default");
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        auto add = [&](std::string name, std::function<void(RunConfig&, const std::string&)> set,
                       std::function<std::string(const RunConfig&)> get) {
            k.push_back({std::move(name), std::move(set), std::move(get)});
        };
        // clang-format off
        add("N", [](RunConfig& c, const std::string& v) { if (v == "default") c.N.reset(); else c.N = to_u64("N", v); },
            [](const RunConfig& c) { return opt<std::uint64_t>(c.N, [](const std::uint64_t& n) { return std::to_string(n); }); });
        add("seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); });
        add("threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(to_u64("threads", v)); },
            [](const RunConfig& c) { return std::to_string(c.threads); });
        add("alpha", [](RunConfig& c, const std::string& v) { c.alpha = to_double("alpha", v); },
            [](const RunConfig& c) { return real(c.alpha); });
        add("p0", [](RunConfig& c, const std::string& v) { c.p0 = to_double("p0", v); },
            [](const RunConfig& c) { return real(c.p0); });
        add("psi0", [](RunConfig& c, const std::string& v) { c.psi0 = to_double("psi0", v); },
            [](const RunConfig& c) { return real(c.psi0); });
        add("psi1", [](RunConfig& c, const std::string& v) { c.psi1 = to_double("psi1", v); },
            [](const RunConfig& c) { return real(c.psi1); });
        add("psi_policy",
            [](RunConfig& c, const std::string& v) {
                if (v == "fixed") c.psi_policy = InputPhasePolicy::Fixed;
                else if (v == "random-run") c.psi_policy = InputPhasePolicy::RandomPerRun;
                else if (v == "random-event") c.psi_policy = InputPhasePolicy::RandomPerEvent;
                else throw ConfigError("psi_policy", "expected fixed, random-run or random-event, got '" + v + "'");
            },
            [](const RunConfig& c) {
                switch (c.psi_policy) {
                    case InputPhasePolicy::Fixed: return std::string("fixed");
                    case InputPhasePolicy::RandomPerEvent: return std::string("random-event");
                    default: return std::string("random-run");
                }
            });
        add("transient", [](RunConfig& c, const std::string& v) { c.transient = to_u64("transient", v); },
            [](const RunConfig& c) { return std::to_string(c.transient); });
        add("phi0", [](RunConfig& c, const std::string& v) { c.phi0 = to_double("phi0", v); },
            [](const RunConfig& c) { return real(c.phi0); });
        add("phi1", [](RunConfig& c, const std::string& v) { c.phi1 = to_double("phi1", v); },
            [](const RunConfig& c) { return real(c.phi1); });
        add("phi_step", [](RunConfig& c, const std::string& v) { c.phi_step = to_double("phi_step", v); },
            [](const RunConfig& c) { return real(c.phi_step); });
        add("sweep", [](RunConfig& c, const std::string& v) { c.sweep = to_bool("sweep", v); },
            [](const RunConfig& c) { return std::string(c.sweep ? "true" : "false"); });
        add("M", [](RunConfig& c, const std::string& v) { c.M = static_cast<std::size_t>(to_u64("M", v)); },
            [](const RunConfig& c) { return std::to_string(c.M); });
        add("angles1", [](RunConfig& c, const std::string& v) { c.angles1 = v == "random" ? std::vector<double>{} : to_list("angles1", v); },
            [](const RunConfig& c) { return c.angles1.empty() ? std::string("random") : list(c.angles1); });
        add("angles2", [](RunConfig& c, const std::string& v) { c.angles2 = v == "random" ? std::vector<double>{} : to_list("angles2", v); },
            [](const RunConfig& c) { return c.angles2.empty() ? std::string("random") : list(c.angles2); });
        add("source",
            [](RunConfig& c, const std::string& v) {
                if (v == "singlet") c.source = eprb::SourceMode::Kind::SingletRandom;
                else if (v == "fixed") c.source = eprb::SourceMode::Kind::FixedPolarization;
                else throw ConfigError("source", "expected singlet or fixed, got '" + v + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.source == eprb::SourceMode::Kind::SingletRandom ? "singlet" : "fixed");
            });
        add("xi1", [](RunConfig& c, const std::string& v) { c.xi1 = to_double("xi1", v); },
            [](const RunConfig& c) { return real(c.xi1); });
        add("xi2", [](RunConfig& c, const std::string& v) { c.xi2 = to_double("xi2", v); },
            [](const RunConfig& c) { return real(c.xi2); });
        add("T0", [](RunConfig& c, const std::string& v) { c.T0 = to_double("T0", v); },
            [](const RunConfig& c) { return real(c.T0); });
        add("d", [](RunConfig& c, const std::string& v) { c.d = to_double("d", v); },
            [](const RunConfig& c) { return real(c.d); });
        add("d_list", [](RunConfig& c, const std::string& v) { c.d_list = to_list("d_list", v); },
            [](const RunConfig& c) { return list(c.d_list); });
        add("tau", [](RunConfig& c, const std::string& v) { c.tau = to_double("tau", v); },
            [](const RunConfig& c) { return real(c.tau_value()); });
        add("W", [](RunConfig& c, const std::string& v) { c.W = to_double("W", v); },
            [](const RunConfig& c) { return real(c.W_value()); });
        add("delta",
            [](RunConfig& c, const std::string& v) {
                if (v == "auto") {
                    c.auto_delta = true;
                } else {
                    c.auto_delta = false;
                    c.delta = to_double("delta", v);
                }
            },
            [](const RunConfig& c) { return c.auto_delta ? std::string("auto") : real(c.delta); });
        add("delta_resolution", [](RunConfig& c, const std::string& v) { c.delta_resolution = to_double("delta_resolution", v); },
            [](const RunConfig& c) { return real(c.delta_resolution > 0 ? c.delta_resolution : 4.0 * c.tau_value()); });
        add("search_range", [](RunConfig& c, const std::string& v) { c.search_range = to_double("search_range", v); },
            [](const RunConfig& c) { return real(c.search_range > 0 ? c.search_range : 100.0 * c.tau_value()); });
        add("pairing",
            [](RunConfig& c, const std::string& v) {
                if (v == "index") c.pairing = analysis::Pairing::ByIndex;
                else if (v == "time") c.pairing = analysis::Pairing::ByTimeMatching;
                else throw ConfigError("pairing", "expected index or time, got '" + v + "'");
            },
            [](const RunConfig& c) { return std::string(c.pairing == analysis::Pairing::ByIndex ? "index" : "time"); });
        add("rule",
            [](RunConfig& c, const std::string& v) {
                if (v == "discretized") c.rule = analysis::WindowRule::Discretized;
                else if (v == "continuous") c.rule = analysis::WindowRule::Continuous;
                else throw ConfigError("rule", "expected discretized or continuous, got '" + v + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.rule == analysis::WindowRule::Discretized ? "discretized" : "continuous");
            });
        add("windows", [](RunConfig& c, const std::string& v) { c.windows = to_list("windows", v); },
            [](const RunConfig& c) { return list(c.windows); });
        add("bin_width", [](RunConfig& c, const std::string& v) { c.bin_width = to_double("bin_width", v); },
            [](const RunConfig& c) { return real(c.bin_width > 0 ? c.bin_width : 8.0 * c.tau_value()); });
        add("x", [](RunConfig& c, const std::string& v) { if (v == "default") c.x_filter.reset(); else c.x_filter = to_sign("x", v); },
            [](const RunConfig& c) { return opt<int>(c.x_filter, [](const int& s) { return std::string(s > 0 ? "+1" : "-1"); }); });
        add("y", [](RunConfig& c, const std::string& v) { if (v == "default") c.y_filter.reset(); else c.y_filter = to_sign("y", v); },
            [](const RunConfig& c) { return opt<int>(c.y_filter, [](const int& s) { return std::string(s > 0 ? "+1" : "-1"); }); });
        add("m1", [](RunConfig& c, const std::string& v) { if (v == "default") c.m1_filter.reset(); else c.m1_filter = static_cast<std::uint32_t>(to_u64("m1", v)); },
            [](const RunConfig& c) { return opt<std::uint32_t>(c.m1_filter, [](const std::uint32_t& m) { return std::to_string(m); }); });
        add("m2", [](RunConfig& c, const std::string& v) { if (v == "default") c.m2_filter.reset(); else c.m2_filter = static_cast<std::uint32_t>(to_u64("m2", v)); },
            [](const RunConfig& c) { return opt<std::uint32_t>(c.m2_filter, [](const std::uint32_t& m) { return std::to_string(m); }); });
        add("grid_step", [](RunConfig& c, const std::string& v) { c.grid_step = to_double("grid_step", v); },
            [](const RunConfig& c) { return real(c.grid_step); });
        add("out", [](RunConfig& c, const std::string& v) { c.out = v; }, [](const RunConfig& c) { return c.out; });
        add("out1", [](RunConfig& c, const std::string& v) { c.out1 = v; }, [](const RunConfig& c) { return c.out1; });
        add("out2", [](RunConfig& c, const std::string& v) { c.out2 = v; }, [](const RunConfig& c) { return c.out2; });
        add("in1", [](RunConfig& c, const std::string& v) { c.in1 = v; }, [](const RunConfig& c) { return c.in1; });
        add("in2", [](RunConfig& c, const std::string& v) { c.in2 = v; }, [](const RunConfig& c) { return c.in2; });
        add("trace", [](RunConfig& c, const std::string& v) { c.trace = v; }, [](const RunConfig& c) { return c.trace; });
        add("summary", [](RunConfig& c, const std::string& v) { c.summary = v; }, [](const RunConfig& c) { return c.summary; });
        // clang-format on
        return k;
    }();
    return keys;
}

const Key* find_key(const std::string& name) {
    for (const auto& k : registry()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& k : registry()) n.push_back(k.name);
        return n;
    }();
    return names;
}

void validate(const RunConfig& c) {
    require(!c.N || *c.N >= 1, "N", "must be at least 1");
    require(c.threads >= 1, "threads", "must be at least 1");
    require(c.alpha > 0.0 && c.alpha < 1.0, "alpha", "must lie in (0, 1)");
    require(c.p0 >= 0.0 && c.p0 <= 1.0, "p0", "must lie in [0, 1]");
    require(finite(c.psi0), "psi0", "must be finite");
    require(finite(c.psi1), "psi1", "must be finite");
    require(finite(c.phi0), "phi0", "must be finite");
    require(finite(c.phi1), "phi1", "must be finite");
    require(finite(c.phi_step) && c.phi_step > 0.0, "phi_step", "must be positive");
    require(c.M >= 1, "M", "must be at least 1");
    for (double a : c.angles1) require(finite(a), "angles1", "angles must be finite");
    for (double a : c.angles2) require(finite(a), "angles2", "angles must be finite");
    require(finite(c.xi1), "xi1", "must be finite");
    require(finite(c.xi2), "xi2", "must be finite");
    require(finite(c.T0) && c.T0 > 0.0, "T0", "must be positive");
    require(finite(c.d) && c.d >= 0.0, "d", "must be non-negative");
    require(!c.d_list.empty(), "d_list", "must not be empty");
    for (double d : c.d_list) require(finite(d) && d >= 0.0, "d_list", "exponents must be non-negative");
    const double tau = c.tau_value();
    const double W = c.W_value();
    require(finite(tau) && tau > 0.0, "tau", "must be positive");
    require(W >= tau, "W", "must satisfy tau <= W (tau = " + real(tau) + ", W = " + real(W) + ")");
    require(finite(c.delta), "delta", "must be finite");
    require(c.delta_resolution >= 0.0 && finite(c.delta_resolution), "delta_resolution", "must be positive");
    require(c.search_range >= 0.0 && finite(c.search_range), "search_range", "must be positive");
    for (std::size_t i = 0; i < c.windows.size(); ++i) {
        require(c.windows[i] >= tau, "windows", "every window must be >= tau");
        require(i == 0 || c.windows[i] > c.windows[i - 1], "windows", "windows must be strictly ascending");
    }
    require(c.bin_width >= 0.0 && finite(c.bin_width), "bin_width", "must be positive");
    require(!c.m1_filter || *c.m1_filter >= 1, "m1", "setting indices start at 1");
    require(!c.m2_filter || *c.m2_filter >= 1, "m2", "setting indices start at 1");
    require(finite(c.grid_step) && c.grid_step > 0.0, "grid_step", "must be positive");
}

RunConfig parse_assignments(const std::vector<std::pair<std::string, std::string>>& assignments, RunConfig base) {
    for (const auto& [key, value] : assignments) {
        const Key* k = find_key(key);
        if (!k) throw ConfigError(key, "unknown configuration key");
        k->set(base, trim(value));
    }
    validate(base);
    return base;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::vector<std::pair<std::string, std::string>> assignments;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = std::regex_replace(line, std::regex("\\s*=\\s*"), "=");
        // Tokens are separated by commas or blanks; a token without '=' continues
        // the previous value, which is how lists such as angles1=0,45 survive.
        std::string token;
        std::vector<std::string> tokens;
        for (char ch : line) {
            if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
                if (!token.empty()) tokens.push_back(token);
                token.clear();
            } else {
                token += ch;
            }
        }
        if (!token.empty()) tokens.push_back(token);
        for (const auto& t : tokens) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                if (assignments.empty() || assignments.back().second.empty()) {
                    throw ConfigError(t, "expected key=value");
                }
                assignments.back().second += "," + t;
            } else {
                assignments.emplace_back(t.substr(0, eq), t.substr(eq + 1));
            }
        }
    }
    return parse_assignments(assignments, std::move(base));
}

std::string canonical_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : registry()) out += k.name + "=" + k.get(cfg) + "\n";
    return out;
}

std::string digest(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

analysis::AnalysisConfig RunConfig::analysis() const {
    analysis::AnalysisConfig a;
    a.tau = tau_value();
    a.W = W_value();
    a.delta = delta;
    a.pairing = pairing;
    a.rule = rule;
    return a;
}

eprb::ExperimentConfig RunConfig::experiment(std::uint64_t default_events) const {
    eprb::ExperimentConfig e;
    e.events = N.value_or(default_events);
    e.seed = seed;
    e.threads = threads;
    e.source = source == eprb::SourceMode::Kind::SingletRandom ? eprb::SourceMode::singlet()
                                                               : eprb::SourceMode::fixed(xi1 * kRadPerDeg, xi2 * kRadPerDeg);
    auto station = [&](int i, const std::vector<double>& deg) {
        eprb::StationConfig s{i, {}, T0, d};
        if (deg.empty()) {
            s.angles = eprb::random_angles(M, seed, i);
        } else {
            for (double a : deg) s.angles.push_back(a * kRadPerDeg);
        }
        return s;
    };
    e.station1 = station(1, angles1);
    e.station2 = station(2, angles2);
    return e;
}

}  // namespace ebsim::config
