#include "frbm/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "frbm/errors.hpp"

namespace frbm {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& value, int line) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    long long x = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) {
        throw ConfigError("expected an integer, got '" + value + "'", line);
    }
    return x;
}

std::uint64_t parse_u64(const std::string& value, int line) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    unsigned long long x = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE || value.front() == '-') {
        throw ConfigError("expected a non-negative integer, got '" + value + "'", line);
    }
    return x;
}

double parse_real(const std::string& value, int line) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE) {
        throw ConfigError("expected a number, got '" + value + "'", line);
    }
    return x;
}

bool parse_bool(const std::string& value, int line) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("expected true/false, got '" + value + "'", line);
}

// Shortest decimal form that parses back to the same double.
std::string fmt_real(double x) {
    char buf[40];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

// One schema row: how to set the field from text and how to render it back.
struct KeyDef {
    const char* section;
    const char* key;
    const char* help;
    std::function<void(FullConfig&, const std::string&, int)> set;
    std::function<std::string(const FullConfig&)> get;
};

const std::vector<KeyDef>& schema() {
    static const std::vector<KeyDef> defs = {
        {"fw", "lambda", "inner l2 strength (> 0)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.lambda = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.fw.lambda); }},
        {"fw", "eta", "bias step size (> 0)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.eta = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.fw.eta); }},
        {"fw", "max_units", "atom budget",
         [](FullConfig& c, const std::string& v, int l) { c.fw.max_units = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.max_units); }},
        {"fw", "inner_tol", "inner solver gradient tolerance",
         [](FullConfig& c, const std::string& v, int l) { c.fw.inner_tol = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.fw.inner_tol); }},
        {"fw", "inner_max_iters", "inner solver iteration cap",
         [](FullConfig& c, const std::string& v, int l) { c.fw.inner_max_iters = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.inner_max_iters); }},
        {"fw", "samples_per_iter", "negative-phase draws per iteration",
         [](FullConfig& c, const std::string& v, int l) { c.fw.samples_per_iter = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.samples_per_iter); }},
        {"fw", "minibatch", "bias-update minibatch size",
         [](FullConfig& c, const std::string& v, int l) { c.fw.minibatch = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.minibatch); }},
        {"fw", "bias_epochs", "bias passes per iteration",
         [](FullConfig& c, const std::string& v, int l) { c.fw.bias_epochs = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.bias_epochs); }},
        {"fw", "alpha_mode", "count or gradient",
         [](FullConfig& c, const std::string& v, int l) {
             if (v == "count") c.fw.alpha_mode = AlphaMode::Count;
             else if (v == "gradient") c.fw.alpha_mode = AlphaMode::Gradient;
             else throw ConfigError("alpha_mode must be count or gradient", l);
         },
         [](const FullConfig& c) {
             return c.fw.alpha_mode == AlphaMode::Count ? "count" : "gradient";
         }},
        {"fw", "alpha_grad_steps", "alpha ascent steps (gradient mode)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.alpha_grad_steps = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.alpha_grad_steps); }},
        {"fw", "alpha_grad_rate", "alpha ascent rate (gradient mode)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.alpha_grad_rate = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.fw.alpha_grad_rate); }},
        {"fw", "eval_every", "iterations between gap evaluations",
         [](FullConfig& c, const std::string& v, int l) { c.fw.eval_every = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.eval_every); }},
        {"fw", "early_stop", "return the best-gap snapshot",
         [](FullConfig& c, const std::string& v, int l) { c.fw.early_stop = parse_bool(v, l); },
         [](const FullConfig& c) { return c.fw.early_stop ? "true" : "false"; }},
        {"fw", "early_stop_patience", "non-improving evaluations before stopping",
         [](FullConfig& c, const std::string& v, int l) { c.fw.early_stop_patience = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.early_stop_patience); }},
        {"fw", "atom_stop_tol", "stop growing once the inner optimum clears this (0 disables)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.atom_stop_tol = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.fw.atom_stop_tol); }},
        {"fw", "seed", "trainer seed",
         [](FullConfig& c, const std::string& v, int l) { c.fw.seed = parse_u64(v, l); },
         [](const FullConfig& c) { return std::to_string(c.fw.seed); }},
        {"fw", "n_chains", "persistent sampling chains",
         [](FullConfig& c, const std::string& v, int l) { c.fw.n_chains = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.fw.n_chains); }},
        {"fw", "burn_in", "sweeps after structural model changes",
         [](FullConfig& c, const std::string& v, int l) { c.fw.burn_in = parse_int(v, l); },
         [](const FullConfig& c) { return std::to_string(c.fw.burn_in); }},
        {"fw", "thinning", "sweeps between recorded samples",
         [](FullConfig& c, const std::string& v, int l) { c.fw.thinning = parse_int(v, l); },
         [](const FullConfig& c) { return std::to_string(c.fw.thinning); }},
        {"fw", "exact_negative", "enumerate the model instead of sampling (small dims)",
         [](FullConfig& c, const std::string& v, int l) { c.fw.exact_negative = parse_bool(v, l); },
         [](const FullConfig& c) { return c.fw.exact_negative ? "true" : "false"; }},

        {"cd", "k", "Gibbs steps per gradient",
         [](FullConfig& c, const std::string& v, int l) { c.cd.k = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.k); }},
        {"cd", "learning_rate", "ascent step size",
         [](FullConfig& c, const std::string& v, int l) { c.cd.learning_rate = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.cd.learning_rate); }},
        {"cd", "minibatch", "rows per gradient",
         [](FullConfig& c, const std::string& v, int l) { c.cd.minibatch = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.minibatch); }},
        {"cd", "epochs", "training epochs",
         [](FullConfig& c, const std::string& v, int l) { c.cd.epochs = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.epochs); }},
        {"cd", "persistent", "keep chains running across batches",
         [](FullConfig& c, const std::string& v, int l) { c.cd.persistent = parse_bool(v, l); },
         [](const FullConfig& c) { return c.cd.persistent ? "true" : "false"; }},
        {"cd", "hidden_units", "hidden layer width",
         [](FullConfig& c, const std::string& v, int l) { c.cd.hidden_units = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.hidden_units); }},
        {"cd", "init_scale", "random weight scale",
         [](FullConfig& c, const std::string& v, int l) { c.cd.init_scale = parse_real(v, l); },
         [](const FullConfig& c) { return fmt_real(c.cd.init_scale); }},
        {"cd", "restarts", "independent restarts",
         [](FullConfig& c, const std::string& v, int l) { c.cd.restarts = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.restarts); }},
        {"cd", "eval_every", "epochs between gap evaluations",
         [](FullConfig& c, const std::string& v, int l) { c.cd.eval_every = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.eval_every); }},
        {"cd", "early_stop_patience", "non-improving evaluations before stopping (0 = off)",
         [](FullConfig& c, const std::string& v, int l) { c.cd.early_stop_patience = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.cd.early_stop_patience); }},
        {"cd", "restart_select", "gap or exact",
         [](FullConfig& c, const std::string& v, int l) {
             if (v == "gap") c.cd.restart_select = RestartSelect::Gap;
             else if (v == "exact") c.cd.restart_select = RestartSelect::Exact;
             else throw ConfigError("restart_select must be gap or exact", l);
         },
         [](const FullConfig& c) {
             return c.cd.restart_select == RestartSelect::Gap ? "gap" : "exact";
         }},
        {"cd", "seed", "trainer seed",
         [](FullConfig& c, const std::string& v, int l) { c.cd.seed = parse_u64(v, l); },
         [](const FullConfig& c) { return std::to_string(c.cd.seed); }},

        {"ais", "runs", "annealing runs (>= 2)",
         [](FullConfig& c, const std::string& v, int l) { c.ais.runs = static_cast<int>(parse_int(v, l)); },
         [](const FullConfig& c) { return std::to_string(c.ais.runs); }},
        {"ais", "schedule", "default, uniform:N, or @file with one beta per line",
         [](FullConfig& c, const std::string& v, int) { c.ais.schedule = v; },
         [](const FullConfig& c) { return c.ais.schedule; }},
        {"ais", "seed", "evaluator seed",
         [](FullConfig& c, const std::string& v, int l) { c.ais.seed = parse_u64(v, l); },
         [](const FullConfig& c) { return std::to_string(c.ais.seed); }},

        {"data", "validation_count", "rows split off for validation",
         [](FullConfig& c, const std::string& v, int l) { c.data.validation_count = parse_int(v, l); },
         [](const FullConfig& c) { return std::to_string(c.data.validation_count); }},
        {"data", "seed", "split shuffle seed",
         [](FullConfig& c, const std::string& v, int l) { c.data.seed = parse_u64(v, l); },
         [](const FullConfig& c) { return std::to_string(c.data.seed); }},
    };
    return defs;
}

void validate_schedule_spec(const std::string& spec) {
    if (spec == "default") return;
    if (spec.rfind("uniform:", 0) == 0) {
        const std::string n = spec.substr(8);
        if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("AisSettings: bad uniform schedule '" + spec + "'");
        }
        if (std::atoll(n.c_str()) < 2) {
            throw std::invalid_argument("AisSettings: uniform schedule needs at least 2 points");
        }
        return;
    }
    if (spec.rfind('@', 0) == 0 && spec.size() > 1) return;
    throw std::invalid_argument("AisSettings: schedule must be default, uniform:N, or @file");
}

}  // namespace

FullConfig parse_config(const std::string& text) {
    FullConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& def : schema()) {
                if (section == def.section) {
                    known = true;
                    break;
                }
            }
            if (!known) throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key outside any section", line_no);
        if (key.empty()) throw ConfigError("empty key", line_no);
        bool applied = false;
        for (const auto& def : schema()) {
            if (section == def.section && key == def.key) {
                def.set(cfg, value, line_no);
                applied = true;
                break;
            }
        }
        if (!applied) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    }
    validate(cfg.fw);
    validate(cfg.cd);
    if (cfg.ais.runs < 2) throw std::invalid_argument("AisSettings: runs must be >= 2");
    validate_schedule_spec(cfg.ais.schedule);
    if (cfg.data.validation_count < 0) {
        throw std::invalid_argument("DataConfig: validation_count must be >= 0");
    }
    return cfg;
}

FullConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<ConfigEntry> dump_config(const FullConfig& cfg) {
    std::vector<ConfigEntry> out;
    out.reserve(schema().size());
    for (const auto& def : schema()) {
        out.push_back({def.section, def.key, def.get(cfg), def.help});
    }
    return out;
}

std::string config_help() {
    const FullConfig defaults;
    std::ostringstream out;
    std::string section;
    for (const auto& entry : dump_config(defaults)) {
        if (entry.section != section) {
            section = entry.section;
            out << "[" << section << "]\n";
        }
        out << "  " << entry.key << " = " << entry.value << "\n      " << entry.help << "\n";
    }
    return out.str();
}

}  // namespace frbm
