#include "pseudofit/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pseudofit {

using nlohmann::json;

namespace {

json vec_to_json(const Vector& v) {
    json re = json::array(), im = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return json{{"re", re}, {"im", im}};
}

Vector vec_from_json(const json& j, const char* key) {
    if (!j.contains("re") || !j.contains("im"))
        throw InputError(std::string("json: '") + key + "' must carry 're' and 'im' arrays");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || re.size() != im.size())
        throw InputError(std::string("json: '") + key + "' re/im arrays must match");
    Vector v(Index(re.size()));
    for (Index i = 0; i < v.size(); ++i)
        v[i] = Complex(re.at(size_t(i)).get<double>(), im.at(size_t(i)).get<double>());
    return v;
}

json mat_to_json(const Matrix& m) {
    json re = json::array(), im = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            rrow.push_back(m(i, j).real());
            irow.push_back(m(i, j).imag());
        }
        re.push_back(rrow);
        im.push_back(irow);
    }
    return json{{"re", re}, {"im", im}};
}

Matrix mat_from_json(const json& j, const char* key) {
    if (!j.contains("re") || !j.contains("im"))
        throw InputError(std::string("json: '") + key + "' must carry 're' and 'im' arrays");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || re.size() != im.size() || re.empty())
        throw InputError(std::string("json: '") + key + "' must be a nonempty matrix");
    const Index rows = Index(re.size());
    const Index cols = Index(re.at(0).size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (Index(re.at(size_t(i)).size()) != cols || Index(im.at(size_t(i)).size()) != cols)
            throw InputError(std::string("json: '") + key + "' has ragged rows");
        for (Index jj = 0; jj < cols; ++jj)
            m(i, jj) = Complex(re.at(size_t(i)).at(size_t(jj)).get<double>(),
                               im.at(size_t(i)).at(size_t(jj)).get<double>());
    }
    return m;
}

RealVector real_vec_from_json(const json& j, const char* key) {
    if (!j.is_array()) throw InputError(std::string("json: '") + key + "' must be an array");
    RealVector v(Index(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = j.at(size_t(i)).get<double>();
    return v;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("json parse error: ") + e.what());
    }
}

}  // namespace

std::string to_json(const CoupledModel& cm) {
    json j{{"N", cm.size()}, {"g", vec_to_json(cm.g)}, {"H", mat_to_json(cm.H)},
           {"Gamma", mat_to_json(cm.Gamma)}};
    return j.dump(2);
}

CoupledModel coupled_model_from_json(const std::string& text) {
    json j = parse(text);
    for (const char* key : {"N", "g", "H", "Gamma"})
        if (!j.contains(key)) throw InputError(std::string("coupled model json: missing '") + key + "'");
    CoupledModel cm;
    cm.g = vec_from_json(j.at("g"), "g");
    cm.H = mat_from_json(j.at("H"), "H");
    cm.Gamma = mat_from_json(j.at("Gamma"), "Gamma");
    if (Index(j.at("N").get<int>()) != cm.g.size())
        throw InputError("coupled model json: 'N' does not match g length");
    cm.validate();
    return cm;
}

std::string to_json(const QuasiModel& m) {
    json j{{"N", m.size()}, {"poles", vec_to_json(m.poles)}, {"weights", vec_to_json(m.weights)}};
    if (m.has_factorization()) {
        j["l"] = vec_to_json(m.l);
        j["r"] = vec_to_json(m.r);
    }
    return j.dump(2);
}

QuasiModel quasi_model_from_json(const std::string& text) {
    json j = parse(text);
    for (const char* key : {"N", "poles", "weights"})
        if (!j.contains(key)) throw InputError(std::string("quasi model json: missing '") + key + "'");
    QuasiModel m;
    m.poles = vec_from_json(j.at("poles"), "poles");
    m.weights = vec_from_json(j.at("weights"), "weights");
    if (j.contains("l")) m.l = vec_from_json(j.at("l"), "l");
    if (j.contains("r")) m.r = vec_from_json(j.at("r"), "r");
    m.validate();
    return m;
}

std::string to_json(const PoleResidue& pr) {
    json j{{"poles", vec_to_json(pr.poles)}, {"residues", vec_to_json(pr.residues)}};
    return j.dump(2);
}

PoleResidue pole_residue_from_json(const std::string& text) {
    json j = parse(text);
    for (const char* key : {"poles", "residues"})
        if (!j.contains(key)) throw InputError(std::string("pole-residue json: missing '") + key + "'");
    PoleResidue pr;
    pr.poles = vec_from_json(j.at("poles"), "poles");
    pr.residues = vec_from_json(j.at("residues"), "residues");
    pr.validate();
    return pr;
}

namespace {

SpectralDensity density_from_json_obj(const json& j);

SpectralDensity density_variant(const std::string& type, const json& j) {
    auto need = [&](const char* key) -> double {
        if (!j.contains(key))
            throw InputError("bath json: density '" + type + "' missing key '" + key + "'");
        return j.at(key).get<double>();
    };
    if (type == "ohmic") return OhmicFamily{need("s"), need("omega_c")};
    if (type == "lorentzian_like") return LorentzianLike{need("g"), need("kappa"), need("omega_c")};
    if (type == "semicircular") return Semicircular{need("gamma"), need("W")};
    if (type == "antisym_lorentzian")
        return AntisymLorentzian{need("S"), need("Gamma"), need("Omega")};
    if (type == "sum") {
        if (!j.contains("terms") || !j.at("terms").is_array())
            throw InputError("bath json: density 'sum' needs a 'terms' array");
        DensitySum sum;
        for (const auto& term : j.at("terms")) sum.terms.push_back(density_from_json_obj(term));
        return {std::move(sum)};
    }
    if (type == "tabulated") {
        if (!j.contains("grid") || !j.contains("values"))
            throw InputError("bath json: density 'tabulated' needs 'grid' and 'values'");
        return Tabulated{real_vec_from_json(j.at("grid"), "grid"),
                         real_vec_from_json(j.at("values"), "values")};
    }
    throw InputError("bath json: unknown density type '" + type + "'");
}

SpectralDensity density_from_json_obj(const json& j) {
    if (!j.contains("type")) throw InputError("bath json: density missing 'type'");
    return density_variant(j.at("type").get<std::string>(), j);
}

json density_to_json(const SpectralDensity& d) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OhmicFamily>)
                return json{{"type", "ohmic"}, {"s", v.s}, {"omega_c", v.omega_c}};
            else if constexpr (std::is_same_v<T, LorentzianLike>)
                return json{{"type", "lorentzian_like"}, {"g", v.g}, {"kappa", v.kappa},
                            {"omega_c", v.omega_c}};
            else if constexpr (std::is_same_v<T, Semicircular>)
                return json{{"type", "semicircular"}, {"gamma", v.gamma}, {"W", v.half_width}};
            else if constexpr (std::is_same_v<T, AntisymLorentzian>)
                return json{{"type", "antisym_lorentzian"}, {"S", v.strength}, {"Gamma", v.width},
                            {"Omega", v.center}};
            else if constexpr (std::is_same_v<T, DensitySum>) {
                json terms = json::array();
                for (const auto& t : v.terms) terms.push_back(density_to_json(t));
                return json{{"type", "sum"}, {"terms", terms}};
            } else {
                json grid = json::array(), values = json::array();
                for (Index i = 0; i < v.grid.size(); ++i) {
                    grid.push_back(v.grid[i]);
                    values.push_back(v.values[i]);
                }
                return json{{"type", "tabulated"}, {"grid", grid}, {"values", values}};
            }
        },
        d.get());
}

}  // namespace

BathSpec bath_spec_from_json(const std::string& text) {
    json j = parse(text);
    if (!j.contains("density")) throw InputError("bath json: missing 'density'");
    SpectralDensity density = density_from_json_obj(j.at("density"));
    double beta = inf;
    if (j.contains("beta")) {
        if (j.at("beta").is_string()) {
            if (j.at("beta").get<std::string>() != "inf")
                throw InputError("bath json: 'beta' string must be \"inf\"");
        } else {
            beta = j.at("beta").get<double>();
        }
    }
    Statistics stats = Statistics::bosonic;
    if (j.contains("statistics")) {
        const std::string s = j.at("statistics").get<std::string>();
        if (s == "bosonic") stats = Statistics::bosonic;
        else if (s == "fermionic") stats = Statistics::fermionic;
        else throw InputError("bath json: 'statistics' must be bosonic or fermionic");
    }
    BathSpec bath{std::move(density), beta, stats, j.value("mu", 0.0)};
    bath.validate();
    return bath;
}

std::string to_json(const BathSpec& bath) {
    json j{{"density", density_to_json(bath.density)},
           {"statistics", bath.statistics == Statistics::bosonic ? "bosonic" : "fermionic"}};
    if (std::isfinite(bath.beta)) j["beta"] = bath.beta;
    else j["beta"] = "inf";
    if (bath.statistics == Statistics::fermionic) j["mu"] = bath.mu;
    return j.dump(2);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_time_series_csv(const std::filesystem::path& path, const TimeSeries& ts,
                           const std::string& value_name) {
    std::ostringstream out;
    out << "t, Re " << value_name << ", Im " << value_name << "\n";
    for (Index i = 0; i < ts.size(); ++i)
        out << format_double(ts.grid[i]) << ", " << format_double(ts.values[i].real()) << ", "
            << format_double(ts.values[i].imag()) << "\n";
    write_text_file(path, out.str());
}

TimeSeries time_series_from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open for reading: " + path.string());
    std::string line;
    std::vector<double> t;
    std::vector<Complex> v;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;
        }
        std::istringstream ss(line);
        double a = 0, b = 0, c = 0;
        char comma = 0;
        if (!(ss >> a >> comma >> b)) throw InputError("time-series csv: malformed row");
        if (!(ss >> comma >> c)) c = 0.0;
        t.push_back(a);
        v.emplace_back(b, c);
    }
    if (t.size() < 2) throw InputError("time-series csv: need at least 2 rows");
    return TimeSeries(Eigen::Map<RealVector>(t.data(), Index(t.size())),
                      Eigen::Map<Vector>(v.data(), Index(v.size())));
}

void write_freq_series_csv(const std::filesystem::path& path, const FreqSeries& fs,
                           const std::string& value_name) {
    std::ostringstream out;
    out << "omega, " << value_name << "\n";
    for (Index i = 0; i < fs.size(); ++i)
        out << format_double(fs.grid[i]) << ", " << format_double(fs.values[i]) << "\n";
    write_text_file(path, out.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ostringstream out;
    const Index ds = traj.rho_s.empty() ? 0 : traj.rho_s[0].rows();
    out << "t";
    for (Index s = 0; s < ds; ++s) out << ", n" << s;
    for (const auto& [name, series] : traj.observables)
        out << ", Re " << name << ", Im " << name;
    out << ", trace_defect, min_eig_rhoS\n";
    for (Index i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]);
        for (Index s = 0; s < ds; ++s)
            out << ", " << format_double(traj.rho_s[size_t(i)](s, s).real());
        for (const auto& [name, series] : traj.observables)
            out << ", " << format_double(series[i].real()) << ", "
                << format_double(series[i].imag());
        out << ", " << format_double(traj.trace_defect[i]) << ", "
            << format_double(traj.min_eig_rho_s[i]) << "\n";
    }
    write_text_file(path, out.str());
}

}  // namespace pseudofit
