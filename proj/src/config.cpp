#include "gsle/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gsle {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

const std::map<std::string, std::set<std::string>>& key_table()
{
    static const std::map<std::string, std::set<std::string>> table{
        {"run", {"mode", "seed", "ensemble_seeds", "output", "workers"}},
        {"grid", {"x_min", "x_max", "points"}},
        {"physics", {"hbar", "mass"}},
        {"potential", {"kind", "omega", "slope", "quartic", "quadratic", "coefficients", "values"}},
        {"coupling", {"kind", "value", "exponent", "amplitude", "wavenumber"}},
        {"dynamics", {"friction", "sign", "kappa", "measurement_sign", "dt", "n_steps"}},
        {"noise", {"kind", "temperature", "cutoff", "oscillators"}},
        {"initial", {"kind", "x0", "p0", "sigma", "index", "file"}},
        {"output",
         {"snapshot_stride", "observables", "snapshots", "trajectories", "weak_values", "noise", "n_trajectories",
          "trajectory_substeps"}},
        {"classical", {"n_particles", "x0", "p0", "sigma_x", "sigma_p", "memory", "history_cap"}},
        {"gup", {"alpha"}},
    };
    return table;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r\"");
    const auto e = s.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const
    {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double real(const std::string& section, const std::string& key, double fallback) const
    {
        const auto r = raw(section, key);
        return r ? parse_real(*r, section + "." + key) : fallback;
    }

    template <typename Int>
    Int integer(const std::string& section, const std::string& key, Int fallback) const
    {
        const auto r = raw(section, key);
        if (!r) return fallback;
        Int v{};
        const auto* end = r->data() + r->size();
        const auto res = std::from_chars(r->data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) fail(section + "." + key + ": expected an integer, got '" + *r + "'");
        return v;
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) const
    {
        const auto r = raw(section, key);
        if (!r) return fallback;
        if (*r == "true" || *r == "yes" || *r == "1") return true;
        if (*r == "false" || *r == "no" || *r == "0") return false;
        fail(section + "." + key + ": expected true or false, got '" + *r + "'");
    }

    std::string word(const std::string& section, const std::string& key, const std::string& fallback) const
    {
        return raw(section, key).value_or(fallback);
    }

    std::vector<double> list(const std::string& section, const std::string& key) const
    {
        std::vector<double> out;
        const auto r = raw(section, key);
        if (!r || r->empty()) return out;
        std::stringstream ss(*r);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), section + "." + key));
        return out;
    }

    static double parse_real(const std::string& s, const std::string& where)
    {
        if (s.empty()) fail(where + ": missing value");
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || !std::isfinite(v)) fail(where + ": expected a number, got '" + s + "'");
        return v;
    }

private:
    const pt::ptree& tree_;
};

template <typename E>
E pick(const std::string& value, const std::string& where, std::initializer_list<std::pair<const char*, E>> options)
{
    std::string names;
    for (const auto& [name, e] : options) {
        if (value == name) return e;
        names += names.empty() ? name : std::string("|") + name;
    }
    fail(where + ": unknown value '" + value + "' (expected " + names + ")");
}

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s;
}

const char* yes(bool b) { return b ? "true" : "false"; }

CouplingFunction build_coupling(const CouplingSpec& c, const SimConfig& sim)
{
    switch (c.kind) {
    case CouplingSpec::Kind::linear: return CouplingFunction::linear();
    case CouplingSpec::Kind::constant: return CouplingFunction::constant(c.value);
    case CouplingSpec::Kind::power: return CouplingFunction::power(c.exponent);
    case CouplingSpec::Kind::sinusoidal: return CouplingFunction::sinusoidal(c.amplitude, c.wavenumber);
    case CouplingSpec::Kind::gup: return gup_coupling(sim.potential, sim.grid, sim.params.mass);
    }
    fail("unknown coupling kind");
}

} // namespace

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::gsle: return "gsle";
    case Mode::classical: return "classical";
    case Mode::compare: return "compare";
    case Mode::bohmian_post: return "bohmian-post";
    }
    return "?";
}

ExperimentSpec parse_config(std::string_view text)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(std::string("malformed configuration: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [section, body] : tree) {
        const auto it = key_table().find(section);
        if (it == key_table().end()) {
            if (body.empty()) fail("unknown key '" + section + "' (keys belong to a [section])");
            fail("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body)
            if (!it->second.contains(key)) fail("unknown key '" + section + "." + key + "'");
    }

    const Reader r(tree);
    ExperimentSpec s;
    SimConfig& sim = s.sim;

    s.mode = pick<Mode>(r.word("run", "mode", "gsle"), "run.mode",
                        {{"gsle", Mode::gsle},
                         {"classical", Mode::classical},
                         {"compare", Mode::compare},
                         {"bohmian-post", Mode::bohmian_post}});
    sim.seed = r.integer<std::uint64_t>("run", "seed", 0);
    s.ensemble_seeds = r.integer<std::size_t>("run", "ensemble_seeds", 1);
    s.output_dir = r.word("run", "output", "out");
    s.workers = r.integer<unsigned>("run", "workers", 1);
    if (s.ensemble_seeds < 1) fail("ensemble_seeds must be at least 1");
    if (s.workers < 1) fail("workers must be at least 1");

    try {
        sim.grid = Grid(r.real("grid", "x_min", -20.0), r.real("grid", "x_max", 20.0),
                        r.integer<std::size_t>("grid", "points", 512));
        sim.params.hbar = r.real("physics", "hbar", 1.0);
        sim.params.mass = r.real("physics", "mass", 1.0);
        sim.params.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(e.what());
    }

    const std::string pk = r.word("potential", "kind", "free");
    if (pk == "free") {
        sim.potential = PotentialSpec::free_particle();
    } else if (pk == "harmonic") {
        sim.potential = PotentialSpec::harmonic(r.real("potential", "omega", 1.0));
        if (!(sim.potential.omega > 0.0)) fail("omega must be positive");
    } else if (pk == "linear_ramp") {
        sim.potential = PotentialSpec::linear_ramp(r.real("potential", "slope", 1.0));
    } else if (pk == "double_well") {
        sim.potential = PotentialSpec::double_well(r.real("potential", "quartic", 1.0), r.real("potential", "quadratic", 1.0));
    } else if (pk == "polynomial") {
        sim.potential = PotentialSpec::polynomial(r.list("potential", "coefficients"));
    } else if (pk == "tabulated") {
        auto v = r.list("potential", "values");
        if (v.size() != sim.grid.size()) fail("potential.values must list one value per grid point");
        sim.potential = PotentialSpec::tabulated(sim.grid, std::move(v));
    } else {
        fail("potential.kind: unknown value '" + pk + "'");
    }

    auto& c = s.coupling;
    c.kind = pick<CouplingSpec::Kind>(r.word("coupling", "kind", "linear"), "coupling.kind",
                                      {{"linear", CouplingSpec::Kind::linear},
                                       {"constant", CouplingSpec::Kind::constant},
                                       {"power", CouplingSpec::Kind::power},
                                       {"sinusoidal", CouplingSpec::Kind::sinusoidal},
                                       {"gup", CouplingSpec::Kind::gup}});
    if (c.kind == CouplingSpec::Kind::constant) c.value = r.real("coupling", "value", 1.0);
    if (c.kind == CouplingSpec::Kind::power) {
        c.exponent = r.integer<int>("coupling", "exponent", 1);
        if (c.exponent < 0) fail("coupling.exponent must be non-negative");
    }
    if (c.kind == CouplingSpec::Kind::sinusoidal) {
        c.amplitude = r.real("coupling", "amplitude", 1.0);
        c.wavenumber = r.real("coupling", "wavenumber", 1.0);
    }

    sim.friction = r.real("dynamics", "friction", 0.0);
    sim.sign = pick<DampingSign>(r.word("dynamics", "sign", "damping"), "dynamics.sign",
                                 {{"damping", DampingSign::damping}, {"paper", DampingSign::paper}});
    sim.kappa = r.real("dynamics", "kappa", 0.0);
    sim.measurement_sign =
        pick<MeasurementSign>(r.word("dynamics", "measurement_sign", "localizing"), "dynamics.measurement_sign",
                              {{"localizing", MeasurementSign::localizing}, {"paper", MeasurementSign::paper}});
    sim.dt = r.real("dynamics", "dt", 0.005);
    {
        const auto raw = r.raw("dynamics", "n_steps");
        if (raw && !raw->empty() && raw->front() == '-') fail("n_steps must be at least 1");
    }
    sim.n_steps = r.integer<std::size_t>("dynamics", "n_steps", 1000);

    sim.noise.kind = pick<NoiseKind>(r.word("noise", "kind", "zero"), "noise.kind",
                                     {{"zero", NoiseKind::zero}, {"white", NoiseKind::white}, {"bath", NoiseKind::bath}});
    sim.noise.temperature = r.real("noise", "temperature", 0.0);
    sim.noise.ohmic.cutoff = r.real("noise", "cutoff", 50.0);
    sim.noise.ohmic.n_oscillators = r.integer<std::size_t>("noise", "oscillators", 500);
    sim.noise.ohmic.friction = sim.friction;
    sim.noise.ohmic.temperature = sim.noise.temperature;

    const std::string ik = r.word("initial", "kind", "gaussian");
    if (ik == "gaussian") {
        sim.initial = GaussianState{r.real("initial", "x0", 0.0), r.real("initial", "p0", 0.0),
                                    r.real("initial", "sigma", std::sqrt(0.5))};
    } else if (ik == "eigenstate") {
        sim.initial = EigenstateState{r.integer<int>("initial", "index", 0)};
        if (sim.potential.kind != PotentialSpec::Kind::harmonic) fail("eigenstate initial state requires a harmonic potential");
    } else if (ik == "file") {
        s.initial_file = r.word("initial", "file", "");
        if (s.initial_file.empty()) fail("initial.file is required when initial.kind = file");
        sim.initial = ExplicitState{};
    } else {
        fail("initial.kind: unknown value '" + ik + "'");
    }
    if (const auto* g = std::get_if<GaussianState>(&sim.initial); g && !(g->sigma > 0.0))
        fail("initial.sigma must be positive");

    sim.snapshot_stride = r.integer<std::size_t>("output", "snapshot_stride", 0);
    s.emit.observables = r.flag("output", "observables", true);
    s.emit.snapshots = r.flag("output", "snapshots", false);
    s.emit.trajectories = r.flag("output", "trajectories", false);
    s.emit.weak_values = r.flag("output", "weak_values", false);
    s.emit.noise = r.flag("output", "noise", false);
    s.n_trajectories = r.integer<std::size_t>("output", "n_trajectories", 1000);
    s.trajectory_substeps = r.integer<int>("output", "trajectory_substeps", 4);
    if ((s.emit.snapshots || s.emit.trajectories || s.emit.weak_values) && sim.snapshot_stride == 0)
        fail("snapshot_stride must be positive when snapshots, trajectories or weak values are requested");
    if (s.n_trajectories < 1) fail("n_trajectories must be at least 1");
    if (s.trajectory_substeps < 1) fail("trajectory_substeps must be at least 1");

    s.gup_alpha = r.real("gup", "alpha", 0.0);

    try {
        sim.coupling = build_coupling(c, sim);
        sim.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(e.what());
    }

    // The classical side shares everything physical with the wave run.
    LangevinConfig& cl = s.classical;
    cl.params = sim.params;
    cl.potential = sim.potential;
    cl.coupling = sim.coupling;
    cl.friction = sim.friction;
    cl.noise = sim.noise;
    cl.dt = sim.dt;
    cl.n_steps = sim.n_steps;
    const auto* g = std::get_if<GaussianState>(&sim.initial);
    const double sx = g ? g->sigma : 0.0;
    cl.initial = CloudInit{r.real("classical", "x0", g ? g->x0 : 0.0), r.real("classical", "p0", g ? g->p0 : 0.0),
                           r.real("classical", "sigma_x", sx),
                           r.real("classical", "sigma_p", sx > 0.0 ? sim.params.hbar / (2.0 * sx) : 0.0)};
    cl.n_particles = r.integer<std::size_t>("classical", "n_particles", 1000);
    cl.history_cap = r.integer<std::size_t>("classical", "history_cap", std::size_t{1} << 20);
    s.classical_memory = pick<bool>(r.word("classical", "memory", "markovian"), "classical.memory",
                                    {{"markovian", false}, {"kernel", true}});
    try {
        if (s.classical_memory) {
            OhmicSpec o = sim.noise.ohmic;
            o.friction = sim.friction;
            cl.memory = discretize_ohmic(o, sim.params.mass);
        }
        cl.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(e.what());
    }
    return s;
}

ExperimentSpec load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail("cannot read configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_config_text(const ExperimentSpec& s)
{
    const SimConfig& sim = s.sim;
    std::ostringstream o;
    o << "[run]\n"
      << "mode = " << to_string(s.mode) << "\n"
      << "seed = " << sim.seed << "\n"
      << "ensemble_seeds = " << s.ensemble_seeds << "\n"
      << "output = " << s.output_dir << "\n"
      << "workers = " << s.workers << "\n\n";
    o << "[grid]\n"
      << "x_min = " << num(sim.grid.x_min()) << "\n"
      << "x_max = " << num(sim.grid.x_max()) << "\n"
      << "points = " << sim.grid.size() << "\n\n";
    o << "[physics]\nhbar = " << num(sim.params.hbar) << "\nmass = " << num(sim.params.mass) << "\n\n";

    o << "[potential]\n";
    const auto& p = sim.potential;
    switch (p.kind) {
    case PotentialSpec::Kind::free: o << "kind = free\n"; break;
    case PotentialSpec::Kind::harmonic: o << "kind = harmonic\nomega = " << num(p.omega) << "\n"; break;
    case PotentialSpec::Kind::linear_ramp: o << "kind = linear_ramp\nslope = " << num(p.slope) << "\n"; break;
    case PotentialSpec::Kind::double_well:
        o << "kind = double_well\nquartic = " << num(p.quartic) << "\nquadratic = " << num(p.quadratic) << "\n";
        break;
    case PotentialSpec::Kind::polynomial: o << "kind = polynomial\ncoefficients = " << join(p.coefficients) << "\n"; break;
    case PotentialSpec::Kind::tabulated: o << "kind = tabulated\nvalues = " << join(p.table) << "\n"; break;
    }
    o << "\n[coupling]\n";
    const auto& c = s.coupling;
    switch (c.kind) {
    case CouplingSpec::Kind::linear: o << "kind = linear\n"; break;
    case CouplingSpec::Kind::constant: o << "kind = constant\nvalue = " << num(c.value) << "\n"; break;
    case CouplingSpec::Kind::power: o << "kind = power\nexponent = " << c.exponent << "\n"; break;
    case CouplingSpec::Kind::sinusoidal:
        o << "kind = sinusoidal\namplitude = " << num(c.amplitude) << "\nwavenumber = " << num(c.wavenumber) << "\n";
        break;
    case CouplingSpec::Kind::gup: o << "kind = gup\n"; break;
    }

    o << "\n[dynamics]\n"
      << "friction = " << num(sim.friction) << "\n"
      << "sign = " << (sim.sign == DampingSign::damping ? "damping" : "paper") << "\n"
      << "kappa = " << num(sim.kappa) << "\n"
      << "measurement_sign = " << (sim.measurement_sign == MeasurementSign::localizing ? "localizing" : "paper") << "\n"
      << "dt = " << num(sim.dt) << "\n"
      << "n_steps = " << sim.n_steps << "\n\n";

    const char* nk = sim.noise.kind == NoiseKind::zero ? "zero" : sim.noise.kind == NoiseKind::white ? "white" : "bath";
    o << "[noise]\n"
      << "kind = " << nk << "\n"
      << "temperature = " << num(sim.noise.temperature) << "\n"
      << "cutoff = " << num(sim.noise.ohmic.cutoff) << "\n"
      << "oscillators = " << sim.noise.ohmic.n_oscillators << "\n\n";

    o << "[initial]\n";
    if (const auto* g = std::get_if<GaussianState>(&sim.initial)) {
        o << "kind = gaussian\nx0 = " << num(g->x0) << "\np0 = " << num(g->p0) << "\nsigma = " << num(g->sigma) << "\n";
    } else if (const auto* e = std::get_if<EigenstateState>(&sim.initial)) {
        o << "kind = eigenstate\nindex = " << e->index << "\n";
    } else {
        o << "kind = file\nfile = " << s.initial_file << "\n";
    }

    o << "\n[output]\n"
      << "snapshot_stride = " << sim.snapshot_stride << "\n"
      << "observables = " << yes(s.emit.observables) << "\n"
      << "snapshots = " << yes(s.emit.snapshots) << "\n"
      << "trajectories = " << yes(s.emit.trajectories) << "\n"
      << "weak_values = " << yes(s.emit.weak_values) << "\n"
      << "noise = " << yes(s.emit.noise) << "\n"
      << "n_trajectories = " << s.n_trajectories << "\n"
      << "trajectory_substeps = " << s.trajectory_substeps << "\n\n";

    const auto& cl = s.classical;
    o << "[classical]\n"
      << "n_particles = " << cl.n_particles << "\n"
      << "x0 = " << num(cl.initial.x0) << "\n"
      << "p0 = " << num(cl.initial.p0) << "\n"
      << "sigma_x = " << num(cl.initial.sigma_x) << "\n"
      << "sigma_p = " << num(cl.initial.sigma_p) << "\n"
      << "memory = " << (s.classical_memory ? "kernel" : "markovian") << "\n"
      << "history_cap = " << cl.history_cap << "\n\n";

    o << "[gup]\nalpha = " << num(s.gup_alpha) << "\n";
    return o.str();
}

std::string config_digest(const ExperimentSpec& spec)
{
    ExperimentSpec canonical = spec;
    canonical.output_dir.clear();
    canonical.workers = 1;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : to_config_text(canonical)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace gsle
