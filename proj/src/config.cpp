#include "iongate/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace iongate {

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

std::map<std::string, Section> parse_sections(const std::string& text) {
    std::map<std::string, Section> out;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            out[current];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (out[current].count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[current][key] = Entry{value, lineno};
    }
    return out;
}

std::vector<std::string> tokens_of(const std::string& value) {
    std::string s = value;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::replace(s.begin(), s.end(), '(', ' ');
    std::replace(s.begin(), s.end(), ')', ' ');
    std::istringstream in(s);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

double parse_number(const std::string& tok, const std::string& key) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + tok + "'");
    }
    if (pos != tok.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + tok + "'");
    return v;
}

// Quantities carry explicit unit suffixes: "50 MHz", "355 nm", "300 us".
// Plain frequencies (Hz and friends) are cycles and convert to rad/s; an
// explicit "rad/s" suffix is taken verbatim.
double parse_quantity(const Section& sec, const std::string& key, const Entry& e,
                      const std::string& kind) {
    auto toks = tokens_of(e.value);
    if (toks.empty()) throw ConfigError("key '" + key + "': empty value");
    double v = parse_number(toks[0], key);
    std::string unit = toks.size() > 1 ? toks[1] : "";
    if (toks.size() > 2)
        throw ConfigError("key '" + key + "': too many tokens");
    auto fail = [&]() -> double {
        throw ConfigError("key '" + key + "': unit '" + unit + "' not valid for " + kind);
    };
    if (kind == "frequency") {
        if (unit == "rad/s") return v;
        if (unit == "Hz") return v * 2.0 * pi;
        if (unit == "kHz") return v * 2.0 * pi * 1e3;
        if (unit == "MHz") return v * 2.0 * pi * 1e6;
        if (unit == "GHz") return v * 2.0 * pi * 1e9;
        return fail();
    }
    if (kind == "length") {
        if (unit == "m") return v;
        if (unit == "mm") return v * 1e-3;
        if (unit == "um") return v * 1e-6;
        if (unit == "nm") return v * 1e-9;
        return fail();
    }
    if (kind == "time") {
        if (unit == "s") return v;
        if (unit == "ms") return v * 1e-3;
        if (unit == "us") return v * 1e-6;
        if (unit == "ns") return v * 1e-9;
        return fail();
    }
    if (kind == "temperature") {
        if (unit == "K") return v;
        if (unit == "mK") return v * 1e-3;
        if (unit == "uK") return v * 1e-6;
        return fail();
    }
    if (kind == "mass") {
        if (unit == "kg") return v;
        if (unit == "u") return v * codata().atomic_mass_unit;
        return fail();
    }
    if (kind == "angle") {
        if (unit.empty() || unit == "rad") return v;
        if (unit == "deg") return v * pi / 180.0;
        return fail();
    }
    if (kind == "wavenumber") {
        if (unit == "1/m") return v;
        return fail();
    }
    if (kind == "plain") {
        if (unit.empty()) return v;
        return fail();
    }
    (void)sec;
    return fail();
}

class SectionReader {
  public:
    SectionReader(std::map<std::string, Section>& all, const std::string& name)
        : name_(name) {
        auto it = all.find(name);
        sec_ = it == all.end() ? nullptr : &it->second;
    }

    bool present() const { return sec_ != nullptr; }

    bool has(const std::string& key) const { return sec_ && sec_->count(key); }

    double quantity(const std::string& key, const std::string& kind) {
        auto& e = require(key);
        return parse_quantity(*sec_, key, e, kind);
    }
    double quantity_or(const std::string& key, const std::string& kind, double dflt) {
        if (!has(key)) return dflt;
        return quantity(key, kind);
    }
    double number(const std::string& key) { return quantity(key, "plain"); }
    double number_or(const std::string& key, double dflt) {
        if (!has(key)) return dflt;
        return number(key);
    }
    long integer(const std::string& key) {
        double v = number(key);
        long i = static_cast<long>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError("key '" + key + "' must be an integer");
        return i;
    }
    long integer_or(const std::string& key, long dflt) {
        if (!has(key)) return dflt;
        return integer(key);
    }
    std::string text(const std::string& key) { return require(key).value; }
    std::string text_or(const std::string& key, const std::string& dflt) {
        if (!has(key)) return dflt;
        return text(key);
    }
    std::vector<double> numbers(const std::string& key, std::size_t count) {
        auto& e = require(key);
        auto toks = tokens_of(e.value);
        if (toks.size() != count)
            throw ConfigError("key '" + key + "' expects " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (auto& t : toks) out.push_back(parse_number(t, key));
        return out;
    }
    std::vector<long> integers(const std::string& key, std::size_t count) {
        auto vs = numbers(key, count);
        std::vector<long> out;
        for (double v : vs) {
            long i = static_cast<long>(v);
            if (static_cast<double>(i) != v)
                throw ConfigError("key '" + key + "' expects integers");
            out.push_back(i);
        }
        return out;
    }

    void finish() const {
        if (!sec_) return;
        for (auto& [key, e] : *sec_)
            if (!e.used)
                throw ConfigError("section [" + name_ + "]: unknown key '" + key + "'");
    }

  private:
    Entry& require(const std::string& key) {
        if (!sec_ || !sec_->count(key))
            throw ConfigError("section [" + name_ + "]: missing key '" + key + "'");
        auto& e = sec_->at(key);
        e.used = true;
        return e;
    }

    Section* sec_;
    std::string name_;
};

}  // namespace

SimulationConfig parse_config_text(const std::string& text) {
    auto sections = parse_sections(text);
    static const char* known[] = {"ion", "trap", "laser", "thermal", "truncation"};
    for (auto& [name, sec] : sections) {
        if (std::find(std::begin(known), std::end(known), name) == std::end(known))
            throw ConfigError("unknown section [" + name + "]");
    }

    SimulationConfig cfg;
    cfg.config_hash = content_hash(text);

    SectionReader ion(sections, "ion");
    if (!ion.present()) throw ConfigError("missing [ion] section");
    cfg.species.mass_kg = ion.quantity("mass", "mass");
    cfg.species.charge = static_cast<int>(ion.integer_or("charge", 1));
    cfg.species.label = ion.text_or("label", "");
    cfg.n_ions = static_cast<int>(ion.integer("count"));
    if (cfg.n_ions < 1) throw ConfigError("ion count must be >= 1");
    cfg.species.validate();
    ion.finish();

    SectionReader trap(sections, "trap");
    if (!trap.present()) throw ConfigError("missing [trap] section");
    const double rf = trap.quantity("rf", "frequency");
    const bool has_diag = trap.has("a") || trap.has("q");
    const bool has_full = trap.has("A") || trap.has("Q");
    if (has_diag && has_full)
        throw ConfigError("give either diagonal a/q or full A/Q, not both");
    if (has_diag) {
        auto a = trap.numbers("a", 3);
        auto q = trap.numbers("q", 3);
        cfg.drive = TrapDrive::from_diagonal(rf, Eigen::Vector3d(a[0], a[1], a[2]),
                                             Eigen::Vector3d(q[0], q[1], q[2]));
    } else if (has_full) {
        auto a = trap.numbers("A", 9);
        auto q = trap.numbers("Q", 9);
        Eigen::Matrix3d ma, mq;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                ma(r, c) = a[3 * r + c];
                mq(r, c) = q[3 * r + c];
            }
        cfg.drive = TrapDrive::from_matrices(rf, ma, mq);
    } else {
        throw ConfigError("[trap] needs a/q vectors or A/Q matrices");
    }
    trap.finish();

    SectionReader laser(sections, "laser");
    if (laser.present()) {
        LaserConfig lc;
        const bool has_wl = laser.has("wavelength");
        const bool has_dk = laser.has("delta_k");
        if (has_wl == has_dk)
            throw ConfigError("[laser] needs exactly one of wavelength / delta_k");
        lc.delta_k = has_wl ? delta_k_counterprop(laser.quantity("wavelength", "length"))
                            : laser.quantity("delta_k", "wavenumber");
        auto dir = laser.numbers("direction", 3);
        Eigen::Vector3d m(dir[0], dir[1], dir[2]);
        if (m.norm() == 0.0) throw ConfigError("laser direction must be nonzero");
        lc.direction = m / m.norm();
        lc.detuning_rad_s = laser.quantity("detuning", "frequency");
        lc.gate_time_s = laser.quantity("gate_time", "time");
        lc.n_segments = static_cast<int>(laser.integer("segments"));
        auto ions = laser.integers("ions", 2);
        lc.ion_a = static_cast<int>(ions[0]) - 1;
        lc.ion_b = static_cast<int>(ions[1]) - 1;
        if (lc.ion_a < 0 || lc.ion_b < 0 || lc.ion_a >= cfg.n_ions || lc.ion_b >= cfg.n_ions)
            throw ConfigError("laser target ions out of range (1-based)");
        lc.static_phase_rad = laser.quantity_or("static_phase", "angle", 0.0);
        lc.start_offset_s = laser.quantity_or("start_offset", "time", 0.0);
        lc.omega_max_rad_s = laser.quantity_or("omega_max", "frequency", 0.0);
        lc.validate();
        cfg.laser = lc;
        laser.finish();
    }

    SectionReader thermal(sections, "thermal");
    if (thermal.present()) {
        const bool has_t = thermal.has("temperature");
        const bool has_g = thermal.has("doppler_linewidth");
        if (has_t == has_g)
            throw ConfigError("[thermal] needs exactly one of temperature / doppler_linewidth");
        cfg.thermal = has_t
            ? ThermalSpectrum::from_temperature(thermal.quantity("temperature", "temperature"))
            : ThermalSpectrum::from_doppler(thermal.quantity("doppler_linewidth", "frequency"));
        thermal.finish();
    }

    SectionReader trunc(sections, "truncation");
    if (trunc.present()) {
        cfg.truncation.fourier_order = static_cast<int>(trunc.integer_or("fourier_order", 5));
        cfg.truncation.phase_order = static_cast<int>(trunc.integer_or("phase_order", 5));
        cfg.truncation.sideband_order = static_cast<int>(trunc.integer_or("sideband_order", 5));
        cfg.truncation.precision = trunc.number_or("precision", 1e-8);
        cfg.truncation.bessel_cutoff = static_cast<int>(trunc.integer_or("bessel_cutoff", 20));
        trunc.finish();
    }
    cfg.truncation.validate();

    return cfg;
}

SimulationConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace iongate
