#include "tbsim/io.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace tbsim {

using nlohmann::json;

namespace {

json channel_to_json(const ChannelParams& ch)
{
    return json{{"out_coupling_db", ch.out_coupling_db},
                {"channel_loss_db", ch.channel_loss_db},
                {"detector_efficiency", ch.detector_efficiency},
                {"dark_rate_hz", ch.dark_rate_hz},
                {"interferometer_loss_db", ch.interferometer_loss_db},
                {"wavelength_nm", ch.wavelength_nm}};
}

// Reads known keys out of one JSON object, rejecting anything else.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where() + "expected a JSON object");
    }

    void number(const char* key, double& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const char* key, Int& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned())
                    out = v->get<Int>();
                else if (v->get<std::int64_t>() >= 0)
                    out = static_cast<Int>(v->get<std::int64_t>());
                else
                    throw ConfigError(where(key) + "expected a non-negative integer");
            } else {
                out = v->get<Int>();
            }
        }
    }

    void boolean(const char* key, bool& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const char* key, std::string& out, bool& present)
    {
        present = false;
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
            out = v->get<std::string>();
            present = true;
        }
    }

    const json* object(const char* key) { return take(key); }
    std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) throw ConfigError("unknown config key '" + child(k.c_str()) + "'");
    }

private:
    const json* take(const char* key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string where() const { return path_.empty() ? "config: " : "config key '" + path_ + "': "; }
    std::string where(const char* key) const { return "config key '" + child(key) + "': "; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_channel(const json& j, const std::string& path, ChannelParams& ch)
{
    ObjectReader r(j, path);
    r.number("out_coupling_db", ch.out_coupling_db);
    r.number("channel_loss_db", ch.channel_loss_db);
    r.number("detector_efficiency", ch.detector_efficiency);
    r.number("dark_rate_hz", ch.dark_rate_hz);
    r.number("interferometer_loss_db", ch.interferometer_loss_db);
    r.number("wavelength_nm", ch.wavelength_nm);
    r.finish();
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg)
{
    const auto& s = cfg.source;
    return json{{"source",
                 {{"a", s.a},
                  {"b", s.b},
                  {"delta_f", s.delta_f},
                  {"delta_t", s.delta_t},
                  {"rep_rate", s.rep_rate},
                  {"peak_power", s.peak_power}}},
                {"signal", channel_to_json(cfg.signal)},
                {"idler", channel_to_json(cfg.idler)},
                {"coherence_slots", cfg.coherence_slots},
                {"num_pulses", cfg.num_pulses},
                {"pulse_count_unit", to_string(cfg.pulse_count_unit)},
                {"phases", {{"phi_s", cfg.phases.phi_s}, {"phi_i", cfg.phases.phi_i}}},
                {"seed", cfg.seed},
                {"interferometers_present", cfg.interferometers_present}};
}

ExperimentConfig config_from_json(const json& j)
{
    ExperimentConfig cfg = default_config();
    ObjectReader r(j, "");
    if (const json* src = r.object("source")) {
        ObjectReader s(*src, "source");
        s.number("a", cfg.source.a);
        s.number("b", cfg.source.b);
        s.number("delta_f", cfg.source.delta_f);
        s.number("delta_t", cfg.source.delta_t);
        s.number("rep_rate", cfg.source.rep_rate);
        s.number("peak_power", cfg.source.peak_power);
        s.finish();
    }
    if (const json* ch = r.object("signal")) read_channel(*ch, "signal", cfg.signal);
    if (const json* ch = r.object("idler")) read_channel(*ch, "idler", cfg.idler);
    r.integer("coherence_slots", cfg.coherence_slots);
    r.integer("num_pulses", cfg.num_pulses);
    std::string unit;
    bool has_unit = false;
    r.string("pulse_count_unit", unit, has_unit);
    if (has_unit) {
        try {
            cfg.pulse_count_unit = pulse_count_unit_from_string(unit);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config key 'pulse_count_unit': ") + e.what());
        }
    }
    if (const json* ph = r.object("phases")) {
        ObjectReader p(*ph, "phases");
        p.number("phi_s", cfg.phases.phi_s);
        p.number("phi_i", cfg.phases.phi_i);
        p.finish();
    }
    r.integer("seed", cfg.seed);
    r.boolean("interferometers_present", cfg.interferometers_present);
    r.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg)
{
    const std::string canonical = config_to_json(cfg).dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string out = "sha256:";
    for (unsigned int k = 0; k < len; ++k) out += fmt::format("{:02x}", digest[k]);
    return out;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw std::runtime_error("missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
    const std::string& cell = rows.at(row).at(col);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size())
        throw std::runtime_error("row " + std::to_string(row + 1) + ", column '" + header.at(col) +
                                 "': '" + cell + "' is not a number");
    return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw std::runtime_error("row " + std::to_string(t.rows.size() + 1) + ": expected " +
                                     std::to_string(t.header.size()) + " columns, found " +
                                     std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw std::runtime_error("'" + path.string() + "' is empty");
    return t;
}

double parse_phase(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (c != ' ') s += c;
    if (s.empty()) throw std::invalid_argument("empty phase");
    const auto pi_pos = s.find("pi");
    auto to_double = [&](const std::string& part) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw std::invalid_argument("bad phase '" + text + "'");
        return v;
    };
    if (pi_pos == std::string::npos) return to_double(s);

    std::string coef = s.substr(0, pi_pos);
    std::string rest = s.substr(pi_pos + 2);
    double c = 1.0;
    if (coef == "-")
        c = -1.0;
    else if (coef == "+" || coef.empty())
        c = 1.0;
    else {
        if (coef.back() != '*') throw std::invalid_argument("bad phase '" + text + "'");
        c = to_double(coef.substr(0, coef.size() - 1));
    }
    double div = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') throw std::invalid_argument("bad phase '" + text + "'");
        div = to_double(rest.substr(1));
        if (div == 0.0) throw std::invalid_argument("bad phase '" + text + "'");
    }
    return c * std::numbers::pi / div;
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

json manifest_to_json(const RunManifest& m)
{
    return json{{"config_hash", m.config_hash},
                {"seed", m.seed},
                {"command", {{"name", m.command}, {"arguments", m.arguments}}},
                {"outputs", m.outputs},
                {"tool_version", m.tool_version}};
}

}  // namespace tbsim
