#include "cantorlap/cli.hpp"

#include "cantorlap/cohomology.hpp"
#include "cantorlap/functions.hpp"
#include "cantorlap/hodge.hpp"
#include "cantorlap/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cantorlap {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

std::vector<int> parse_block_key(const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            config_error("bad potential block key '" + key + "'");
        }
    }
    if (out.empty()) config_error("empty potential block key");
    return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) config_error("config must be a JSON object");
    RunConfig cfg;
    cfg.document = doc;
    cfg.hash = fnv1a64(doc.dump());

    if (!doc.contains("matrix") || !doc["matrix"].is_array() || doc["matrix"].empty())
        config_error("'matrix' must be a non-empty array of integer rows");
    const auto& rows = doc["matrix"];
    const auto n = static_cast<Eigen::Index>(rows.size());
    cfg.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n)
            config_error("'matrix' must be square");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!rows[i][j].is_number_integer()) config_error("'matrix' entries must be integers");
            cfg.matrix(i, j) = rows[i][j].get<long long>();
        }
    }

    if (doc.contains("potential")) {
        const auto& p = doc["potential"];
        if (!p.is_object()) config_error("'potential' must be an object");
        cfg.potential_given = true;
        cfg.potential.depth = p.value("depth", 1);
        if (p.contains("values")) {
            if (!p["values"].is_object()) config_error("'potential.values' must map block keys to numbers");
            for (const auto& [key, value] : p["values"].items()) {
                if (!value.is_number()) config_error("potential value for '" + key + "' is not a number");
                cfg.potential.values[parse_block_key(key)] = value.get<double>();
            }
        }
    }
    const std::string weighting = doc.value("weighting", std::string("invariant"));
    if (weighting == "invariant")
        cfg.weighting = StartWeighting::kInvariant;
    else if (weighting == "conformal")
        cfg.weighting = StartWeighting::kConformal;
    else
        config_error("'weighting' must be 'invariant' or 'conformal'");

    if (!doc.contains("gamma") || !doc["gamma"].is_number()) config_error("'gamma' is required");
    cfg.gamma = doc["gamma"].get<double>();
    if (!(cfg.gamma > 0)) config_error("'gamma' must be positive");
    if (!doc.contains("level") || !doc["level"].is_number_integer()) config_error("'level' is required");
    cfg.level = doc["level"].get<int>();
    if (cfg.level < 1) config_error("'level' must be at least 1");
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("cannot parse config: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

LCFunction function_from_json(const Diagram& d, const json& pairs, std::size_t cap) {
    if (!pairs.is_array() || pairs.empty()) config_error("a function must be a non-empty array of [path, value]");
    int level = -1;
    std::vector<std::pair<PathId, double>> items;
    for (const auto& item : pairs) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_number())
            config_error("function entries must be [\"v:e1,...\", value]");
        PathId p = PathId::parse(item[0].get<std::string>());
        check_path(d, p);
        if (level >= 0 && p.length() != level) config_error("function paths must share one length");
        level = p.length();
        items.emplace_back(std::move(p), item[1].get<double>());
    }
    if (d.path_count(level) > cap) throw Error(ErrorCode::kCapacityExceeded, "function level too deep");
    LCFunction f{level, std::vector<double>(d.path_count(level), 0.0)};
    for (const auto& [p, v] : items) f.values[path_index(d, p)] = v;
    return f;
}

json function_to_json(const PathTree& tree, const LCFunction& f) {
    json out = json::array();
    for (std::size_t i = 0; i < f.values.size(); ++i)
        out.push_back(json::array({tree.path(f.level, i).to_string(), f.values[i]}));
    return out;
}

Command parse_command(std::string_view name) {
    if (name == "spectrum") return Command::kSpectrum;
    if (name == "weyl") return Command::kWeyl;
    if (name == "heat") return Command::kHeat;
    if (name == "cohomology") return Command::kCohomology;
    if (name == "hodge") return Command::kHodge;
    if (name == "gibbs") return Command::kGibbs;
    config_error("unknown command '" + std::string(name) + "'");
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kConfigError:
        case ErrorCode::kInvalidArgument:
        case ErrorCode::kNotPrimitive:
        case ErrorCode::kZeroLine:
        case ErrorCode::kNotRational:
        case ErrorCode::kInvalidPath:
        case ErrorCode::kLengthMismatch:
            return 2;
        case ErrorCode::kCapacityExceeded:
            return 3;
        case ErrorCode::kGammaTooSmall:
        case ErrorCode::kThresholdViolation:
            return 4;
        default:
            return 1;
    }
}

namespace {

struct Context {
    const RunConfig& cfg;
    const RunOptions& opt;
    Diagram diagram;
    GibbsData gibbs;
    RunResult result;

    Context(const RunConfig& c, const RunOptions& o)
        : cfg(c), opt(o), diagram(c.matrix), gibbs(diagram, c.potential, c.weighting) {
        if (cfg.potential_given && !gibbs.missing_blocks().empty() && !cfg.potential.values.empty())
            result.warnings.push_back(std::to_string(gibbs.missing_blocks().size()) +
                                      " admissible blocks are missing from the potential and count as 0");
    }

    json options(const char* key) const {
        return cfg.document.contains(key) ? cfg.document[key] : json::object();
    }

    std::vector<std::pair<std::string, std::string>> header() const {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash));
        return {{"config_hash", hash},
                {"lambda", format_double(diagram.lambda())},
                {"d_psi", format_double(gibbs.relative_dimension())},
                {"gamma", format_double(cfg.gamma)},
                {"K", std::to_string(cfg.level)}};
    }

    json header_json() const {
        json h = json::object();
        for (const auto& [k, v] : header()) h[k] = v;
        return h;
    }

    void write(const std::string& name, const std::string& body, bool json_file = false) {
        std::filesystem::create_directories(opt.out_dir);
        const auto path = opt.out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path.string());
        if (!json_file)
            for (const auto& [k, v] : header()) out << "# " << k << ": " << v << '\n';
        out << body;
        result.files.push_back(path);
    }

    void write_json(const std::string& name, json body) {
        body["header"] = header_json();
        write(name, body.dump(2) + "\n", true);
    }

    void report(const std::string& name, const std::string& text) {
        result.report += text;
        write(name, text);
    }
};

// Paths contain commas, so CSV cells holding them are quoted.
std::string quoted(const std::string& s) { return '"' + s + '"'; }

std::string generator_string(const Diagram& d, int level, std::uint64_t index) {
    return quoted(generator_path(d, level, index).to_string());
}

void cmd_spectrum(Context& ctx) {
    SpectrumOptions so;
    so.cap = ctx.opt.cap;
    so.threads = ctx.opt.threads;
    so.keep_blocks = false;
    std::ostringstream csv, rep;
    csv << "level,generator,eigenvalue,multiplicity\n";
    if (ctx.opt.exact) {
        if (!ctx.gibbs.is_zero_potential())
            config_error("exact mode needs the zero potential");
        const double rounded = std::round(ctx.cfg.gamma);
        if (rounded != ctx.cfg.gamma) config_error("exact mode needs an integer gamma");
        const auto table = exact_spectrum_table(ctx.diagram, static_cast<long>(rounded), ctx.cfg.level, so);
        for (const auto& e : table.entries)
            csv << e.level << ',' << generator_string(ctx.diagram, e.level, e.generator) << ','
                << e.value.get_str() << ',' << e.multiplicity << '\n';
        rep << "smallest eigenvalue: " << table.entries.front().value.get_str() << '\n';
        rep << "multiplicity of smallest: " << table.entries.front().multiplicity << '\n';
        if (table.entries.size() > 1) rep << "next eigenvalue: " << table.entries[1].value.get_str() << '\n';
        rep << "distinct eigenvalues: " << table.entries.size() << '\n';
        rep << "completeness threshold: " << table.completeness_threshold.get_str() << '\n';
    } else {
        require_gamma(ctx.gibbs, ctx.cfg.gamma);
        const auto table = spectrum_table(ctx.gibbs, ctx.cfg.gamma, ctx.cfg.level, so);
        for (const auto& e : table.entries)
            csv << e.level << ',' << generator_string(ctx.diagram, e.level, e.generator) << ','
                << format_double(e.value) << ',' << e.multiplicity << '\n';
        rep << "smallest eigenvalue: " << format_double(table.entries.front().value) << '\n';
        rep << "multiplicity of smallest: " << table.entries.front().multiplicity << '\n';
        if (table.entries.size() > 1) rep << "next eigenvalue: " << format_double(table.entries[1].value) << '\n';
        rep << "distinct eigenvalues: " << table.entries.size() << '\n';
        rep << "total multiplicity: " << table.total_multiplicity() << '\n';
        rep << "completeness threshold: " << format_double(table.completeness_threshold) << '\n';
    }
    ctx.write("spectrum.csv", csv.str());
    ctx.report("spectrum_report.txt", rep.str());
}

void cmd_weyl(Context& ctx) {
    require_gamma_strict(ctx.gibbs, ctx.cfg.gamma);
    SpectrumOptions so;
    so.cap = ctx.opt.cap;
    so.threads = ctx.opt.threads;
    so.keep_blocks = false;
    const auto table = spectrum_table(ctx.gibbs, ctx.cfg.gamma, ctx.cfg.level, so);
    const json o = ctx.options("weyl");
    const double d = ctx.gibbs.relative_dimension();
    const double thr = table.completeness_threshold;
    const WeylFit fit = weyl_fit(table, d, o.value("lambda_min", std::sqrt(thr)), o.value("lambda_max", thr));
    std::ostringstream csv, rep;
    csv << "lambda,count\n";
    std::uint64_t count = 0;
    for (const auto& e : table.entries) {
        if (!(e.value < thr)) break;
        count += e.multiplicity;
        csv << format_double(e.value) << ',' << count << '\n';
    }
    rep << "fitted slope: " << format_double(fit.slope) << '\n';
    rep << "expected slope 1/(gamma - d_psi): " << format_double(fit.expected_slope) << '\n';
    rep << "relative deviation: " << format_double(std::abs(fit.slope / fit.expected_slope - 1.0)) << '\n';
    rep << "band N(L) L^-expected: [" << format_double(fit.band_min) << ", " << format_double(fit.band_max) << "]\n";
    rep << "window: [" << format_double(fit.window_lo) << ", " << format_double(fit.window_hi) << ")\n";
    rep << "points: " << fit.points << ", levels: " << fit.levels << '\n';
    ctx.write("counting.csv", csv.str());
    ctx.report("weyl_report.txt", rep.str());
}

void cmd_heat(Context& ctx) {
    require_gamma(ctx.gibbs, ctx.cfg.gamma);
    const json o = ctx.options("heat");
    const CellSpace space(ctx.gibbs, ctx.cfg.level, ctx.opt.cap);
    const EigenBasis basis(space, ctx.cfg.level);
    SpectrumOptions so;
    so.cap = ctx.opt.cap;
    so.threads = ctx.opt.threads;
    const auto table = spectrum_table(ctx.gibbs, ctx.cfg.gamma, ctx.cfg.level, so);
    std::vector<double> times = o.value("times", std::vector<double>{0.01, 0.1, 1.0});
    const double tolerance = o.value("tolerance", std::numeric_limits<double>::infinity());
    const PathTree& tree = space.tree();
    const int k = ctx.cfg.level;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (o.contains("pairs")) {
        for (const auto& p : o["pairs"]) {
            if (!p.is_array() || p.size() != 2) config_error("heat pairs must be [x, y] path strings");
            const PathId x = PathId::parse(p[0].get<std::string>());
            const PathId y = PathId::parse(p[1].get<std::string>());
            if (x.length() != k || y.length() != k) config_error("heat pairs must be level-K paths");
            pairs.emplace_back(tree.index_of(x), tree.index_of(y));
        }
    } else {
        const std::size_t n = tree.size(k);
        if (n <= 32) {
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) pairs.emplace_back(x, y);
        } else {
            for (std::size_t y = 0; y < n; ++y) pairs.emplace_back(0, y);
        }
    }
    std::ostringstream csv, rep;
    csv << "x,y,t,p,tail_bound\n";
    for (const auto& [x, y] : pairs)
        for (double t : times) {
            const HeatValue v = heat_kernel(basis, table, x, y, t, tolerance);
            csv << quoted(tree.path(k, x).to_string()) << ',' << quoted(tree.path(k, y).to_string()) << ',' << format_double(t)
                << ',' << format_double(v.value) << ',' << format_double(v.tail_bound) << '\n';
        }
    const double d = ctx.gibbs.relative_dimension();
    if (ctx.cfg.gamma > d + 1e-12) {
        const HeatEstimate est = heat_estimate_check(basis, table, d, pairs, times);
        rep << "c1: " << format_double(est.c1) << '\n';
        rep << "c2: " << format_double(est.c2) << '\n';
        rep << "c2/c1: " << format_double(est.ratio) << '\n';
        rep << "samples: " << est.samples << '\n';
    } else {
        rep << "two-sided estimate skipped: gamma equals the relative dimension\n";
    }
    ctx.write("heat_kernel.csv", csv.str());
    ctx.report("heat_report.txt", rep.str());
}

json eigen_structure_json(const CohomologySpace& c) {
    json out = json::array();
    for (const auto& s : c.eigen_structure()) {
        json basis = json::array();
        for (Eigen::Index j = 0; j < s.basis.cols(); ++j) {
            json col = json::array();
            for (Eigen::Index i = 0; i < s.basis.rows(); ++i) col.push_back(s.basis(i, j));
            basis.push_back(col);
        }
        out.push_back({{"eigenvalue_re", s.eigenvalue.real()},
                       {"eigenvalue_im", s.eigenvalue.imag()},
                       {"multiplicity", s.multiplicity},
                       {"conjugate_pair", s.conjugate_pair},
                       {"basis_columns", basis}});
    }
    return out;
}

void cmd_cohomology(Context& ctx) {
    const CohomologySpace coh(ctx.diagram);
    const json o = ctx.options("cohomology");
    std::vector<LCFunction> functions;
    int depth = 1;
    if (o.contains("functions"))
        for (const auto& f : o["functions"]) {
            functions.push_back(function_from_json(ctx.diagram, f, ctx.opt.cap));
            depth = std::max(depth, functions.back().level);
        }
    const PathTree tree(ctx.diagram, depth, ctx.opt.cap);
    json out;
    out["dimension"] = coh.dimension();
    json traces = json::array();
    for (const auto& t : coh.traces()) traces.push_back(std::vector<double>(t.b0().data(), t.b0().data() + t.b0().size()));
    out["trace_basis"] = traces;
    out["eigen_structure"] = eigen_structure_json(coh);
    json dual = json::array();
    for (const auto& f : coh.dual_basis()) dual.push_back(function_to_json(tree, f));
    out["dual_basis"] = dual;
    double worst = 0.0;
    for (const auto& t : coh.traces()) worst = std::max(worst, t.recursion_residual(ctx.cfg.level));
    out["recursion_residual"] = worst;
    out["duality_residual"] = coh.duality_residual(tree);
    json classes = json::array();
    for (const auto& f : functions) {
        const Eigen::VectorXd q = coh.class_vector(tree, f);
        classes.push_back(std::vector<double>(q.data(), q.data() + q.size()));
    }
    out["class_vectors"] = classes;
    ctx.write_json("cohomology.json", out);
    std::ostringstream rep;
    rep << "d(A): " << coh.dimension() << '\n';
    rep << "trace recursion residual up to K: " << format_double(worst) << '\n';
    rep << "class vectors: " << functions.size() << '\n';
    ctx.report("cohomology_report.txt", rep.str());
}

void cmd_hodge(Context& ctx) {
    const double threshold = hodge_threshold(ctx.gibbs);
    if (!(ctx.cfg.gamma > threshold))
        throw Error(ErrorCode::kThresholdViolation, "gamma must exceed the Hodge threshold " + format_double(threshold));
    const CohomologySpace coh(ctx.diagram);
    const json o = ctx.options("hodge");
    LCFunction f;
    if (o.contains("function")) {
        f = function_from_json(ctx.diagram, o["function"], ctx.opt.cap);
    } else {
        const int j = o.value("dual_basis", 0);
        if (j < 0 || j >= coh.dimension()) config_error("'hodge.dual_basis' index out of range");
        f = coh.dual_basis()[j];
    }
    std::vector<int> levels = o.value("levels", std::vector<int>{});
    if (levels.empty())
        for (int k = 1; k <= ctx.cfg.level; ++k) levels.push_back(k);
    if (levels.back() != ctx.cfg.level) config_error("'hodge.levels' must end at 'level'");
    const auto steps = refine_and_compare(ctx.gibbs, coh, ctx.cfg.gamma, f, levels, ctx.opt.cap);
    const PathTree tree(ctx.diagram, ctx.cfg.level, ctx.opt.cap);
    const auto& last = steps.back().result;
    json out;
    out["harmonic_representative"] = function_to_json(tree, last.h);
    out["energy"] = last.energy;
    out["harmonicity_residual"] = last.residual;
    out["condition_number"] = last.condition_number;
    json conv = json::array();
    for (const auto& s : steps)
        conv.push_back({{"level", s.level},
                        {"energy", s.result.energy},
                        {"residual", s.result.residual},
                        {"l2_distance_to_previous", s.l2_distance_to_previous}});
    out["convergence"] = conv;
    ctx.write_json("harmonic.json", out);
    std::ostringstream rep;
    rep << "threshold: " << format_double(threshold) << '\n';
    rep << "energy: " << format_double(last.energy) << '\n';
    rep << "harmonicity residual: " << format_double(last.residual) << '\n';
    rep << "condition number: " << format_double(last.condition_number) << '\n';
    rep << "level,energy,l2_distance_to_previous\n";
    for (const auto& s : steps)
        rep << s.level << ',' << format_double(s.result.energy) << ',' << format_double(s.l2_distance_to_previous)
            << '\n';
    ctx.report("hodge_report.txt", rep.str());
}

void cmd_gibbs(Context& ctx) {
    const GibbsData& g = ctx.gibbs;
    const int n = ctx.options("gibbs").value("level", ctx.cfg.level);
    const PathTree tree(ctx.diagram, n, ctx.opt.cap);
    const auto masses = tree_masses(g, tree);
    json out;
    out["pressure"] = g.pressure();
    out["entropy"] = g.entropy();
    out["integral_psi"] = g.integral_psi();
    out["relative_dimension"] = g.relative_dimension();
    out["transfer_eigenvalue"] = g.transfer_eigenvalue();
    out["missing_blocks"] = g.missing_blocks().size();
    const Bounds child = child_ratio_bounds(g, n, ctx.opt.cap);
    out["child_ratio_bounds"] = {child.min, child.max};
    if (n >= g.depth()) {
        const Bounds gibbs = gibbs_property_ratio(g, n, ctx.opt.cap);
        out["gibbs_constants"] = {gibbs.min, gibbs.max};
    }
    const DistortionProfile dist = distortion_profile(g, n, ctx.opt.cap);
    out["distortion_bounds"] = {dist.bounds.min, dist.bounds.max};
    out["shannon_entropy_rate"] = shannon_entropy_rate(g, n, ctx.opt.cap);
    json sums = json::array();
    for (const auto& level : masses) {
        double s = 0.0;
        for (double x : level) s += x;
        sums.push_back(s);
    }
    out["level_sums"] = sums;
    json cells = json::array();
    for (int v = 0; v < ctx.diagram.vertex_count(); ++v) cells.push_back(masses[0][v]);
    out["vertex_masses"] = cells;
    ctx.write_json("gibbs.json", out);
    std::ostringstream rep;
    rep << "pressure: " << format_double(g.pressure()) << '\n';
    rep << "entropy: " << format_double(g.entropy()) << '\n';
    rep << "integral of psi: " << format_double(g.integral_psi()) << '\n';
    rep << "relative dimension: " << format_double(g.relative_dimension()) << '\n';
    rep << "child ratio bounds: [" << format_double(child.min) << ", " << format_double(child.max) << "]\n";
    ctx.report("gibbs_report.txt", rep.str());
}

}  // namespace

RunResult run_command(Command command, const RunConfig& config, const RunOptions& options) {
    if (options.exact && command != Command::kSpectrum)
        config_error("--exact is only available for the spectrum command");
    Context ctx(config, options);
    switch (command) {
        case Command::kSpectrum: cmd_spectrum(ctx); break;
        case Command::kWeyl: cmd_weyl(ctx); break;
        case Command::kHeat: cmd_heat(ctx); break;
        case Command::kCohomology: cmd_cohomology(ctx); break;
        case Command::kHodge: cmd_hodge(ctx); break;
        case Command::kGibbs: cmd_gibbs(ctx); break;
    }
    return std::move(ctx.result);
}

}  // namespace cantorlap
