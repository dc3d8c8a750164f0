#include "nlsinv/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nlsinv {

const char* const code_version = "nlsinv 0.1.0";

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_digest: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(chunk[i]);
            h *= 1099511628211ull;  // FNV prime
        }
        if (got < static_cast<std::streamsize>(sizeof(chunk))) break;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

nlohmann::json complex_to_json(Complex c) {
    if (c.imag() == 0.0) return c.real();
    return nlohmann::json::array({c.real(), c.imag()});
}

Complex complex_from_json(const nlohmann::json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2) {
        return Complex(j[0].get<double>(), j[1].get<double>());
    }
    throw std::invalid_argument("expected a number or [re, im] pair");
}

}  // namespace

Nonlinearity NonlinearitySpec::build() const {
    Nonlinearity nl;
    if (type == "polynomial") {
        nl = polynomial_nl(terms);
    } else if (type == "saturating") {
        nl = saturating_nl(a);
    } else if (type == "zero") {
        nl = zero_nl();
    } else {
        throw std::invalid_argument("NonlinearitySpec: unknown type '" + type + "'");
    }
    if (!label.empty()) nl.label = label;
    return nl;
}

NonlinearitySpec nl_spec_from_json(const nlohmann::json& j) {
    NonlinearitySpec spec;
    spec.type = j.at("type").get<std::string>();
    if (spec.type == "polynomial") {
        for (const auto& t : j.at("terms")) {
            spec.terms.push_back({complex_from_json(t.at("a")), t.at("p").get<double>()});
        }
    } else if (spec.type == "saturating") {
        if (j.contains("a")) spec.a = complex_from_json(j.at("a"));
    } else if (spec.type != "zero") {
        throw std::invalid_argument("nl_spec_from_json: unknown type '" + spec.type + "'");
    }
    if (j.contains("label")) spec.label = j.at("label").get<std::string>();
    return spec;
}

nlohmann::json nl_spec_to_json(const NonlinearitySpec& spec) {
    nlohmann::json j;
    j["type"] = spec.type;
    if (spec.type == "polynomial") {
        j["terms"] = nlohmann::json::array();
        for (const auto& t : spec.terms) {
            j["terms"].push_back({{"a", complex_to_json(t.a)}, {"p", t.p}});
        }
    } else if (spec.type == "saturating") {
        j["a"] = complex_to_json(spec.a);
    }
    if (!spec.label.empty()) j["label"] = spec.label;
    return j;
}

NonlinearitySpec nl_spec_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("nl_spec_from_file: cannot open " + path);
    return nl_spec_from_json(nlohmann::json::parse(in));
}

void write_htable_csv(const std::string& path, const HTable& t) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_htable_csv: cannot open " + path);
    out << "k,re_H,im_H\n";
    for (Eigen::Index i = 0; i < t.k_grid.size(); ++i) {
        out << format_full(t.k_grid[i]) << ',' << format_full(t.values[i].real()) << ','
            << format_full(t.values[i].imag()) << '\n';
    }
}

HTable read_htable_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_htable_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> ks;
    std::vector<Complex> vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        ks.push_back(std::stod(a));
        vs.push_back(Complex(std::stod(b), std::stod(c)));
    }
    HTable t;
    t.k_grid = Eigen::Map<Eigen::VectorXd>(ks.data(), static_cast<Eigen::Index>(ks.size()));
    t.values = Eigen::Map<Eigen::VectorXcd>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    if (ks.size() >= 1) {
        t.k_lo = ks.front();
        t.k_hi = ks.back();
    }
    t.validate();
    return t;
}

void write_dataset_csv(const std::string& path, const MeasurementDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    out << "ell,re_m,im_m,residual,source\n";
    for (const auto& m : ds.measurements) {
        if (!m.valid) continue;
        out << format_full(m.ell) << ',' << format_full(m.value.real()) << ','
            << format_full(m.value.imag()) << ',' << format_full(m.residual) << ','
            << m.source << '\n';
    }
}

MeasurementDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);
    MeasurementDataset ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i) std::getline(ss, f[i], ',');
        Measurement m;
        m.ell = std::stod(f[0]);
        m.value = Complex(std::stod(f[1]), std::stod(f[2]));
        m.residual = std::stod(f[3]);
        m.source = f[4];
        ds.measurements.push_back(m);
    }
    return ds;
}

void write_recovered_json(const std::string& path, const RecoveredH& rh) {
    nlohmann::json j;
    j["method"] = rh.method;
    j["regularization"] = rh.regularization;
    j["residual_norm"] = rh.residual_norm;
    j["amplitude_disc"] = rh.amplitude_disc;
    j["condition_number"] = rh.condition_number;
    j["k_window"] = {rh.table.k_lo, rh.table.k_hi};
    auto& grid = j["k_grid"] = nlohmann::json::array();
    auto& re = j["re_H"] = nlohmann::json::array();
    auto& im = j["im_H"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rh.table.k_grid.size(); ++i) {
        grid.push_back(rh.table.k_grid[i]);
        re.push_back(rh.table.values[i].real());
        im.push_back(rh.table.values[i].imag());
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_recovered_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

RecoveredH read_recovered_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_recovered_json: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    RecoveredH rh;
    rh.method = j.at("method").get<std::string>();
    rh.regularization = j.at("regularization").get<double>();
    rh.residual_norm = j.at("residual_norm").get<double>();
    rh.amplitude_disc = j.at("amplitude_disc").get<double>();
    rh.condition_number = j.at("condition_number").get<double>();
    const auto& grid = j.at("k_grid");
    const auto& re = j.at("re_H");
    const auto& im = j.at("im_H");
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    rh.table.k_grid.resize(n);
    rh.table.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rh.table.k_grid[i] = grid[i].get<double>();
        rh.table.values[i] = Complex(re[i].get<double>(), im[i].get<double>());
    }
    rh.table.k_lo = j.at("k_window")[0].get<double>();
    rh.table.k_hi = j.at("k_window")[1].get<double>();
    rh.table.validate();
    return rh;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
    return nlohmann::json{
        {"command", m.command},         {"parameters", m.parameters},
        {"code_version", m.code_version}, {"input_digests", m.input_digests},
        {"output_digests", m.output_digests}, {"wall_time_s", m.wall_time_s},
    };
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.at("parameters");
    m.code_version = j.at("code_version").get<std::string>();
    m.input_digests = j.at("input_digests");
    m.output_digests = j.at("output_digests");
    m.wall_time_s = j.at("wall_time_s").get<double>();
    return m;
}

void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace nlsinv
