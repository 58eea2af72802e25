#include "dagas/cli.hpp"

#include "dagas/animals.hpp"
#include "dagas/error.hpp"
#include "dagas/gas.hpp"
#include "dagas/gf.hpp"
#include "dagas/lattice.hpp"
#include "dagas/transfer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace dagas {

namespace {

using Json = nlohmann::ordered_json;

std::vector<int> parse_ints(const std::string &text, const std::string &field)
{
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find_first_of(", ", start);
        if (end == std::string::npos) {
            end = text.size();
        }
        if (end > start) {
            int v = 0;
            const char *b = text.data() + start;
            const char *e = text.data() + end;
            auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || ptr != e) {
                throw Error(Errc::parse_error, field, "not an integer list: '" + text + "'");
            }
            out.push_back(v);
        }
        start = end + 1;
    }
    return out;
}

double require_p(const RunConfig &c)
{
    if (!c.p) {
        throw Error(Errc::invalid_argument, "p", "--p is required for '" + c.command + "'");
    }
    return *c.p;
}

Json count_json(const BigInt &x)
{
    if (x >= 0 && x <= std::numeric_limits<std::uint64_t>::max()) {
        return x.convert_to<std::uint64_t>();
    }
    return x.str();
}

Json matrix_json(const Matrix &m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

Json vector_json(const VectorX &v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

Json config_json(const RunConfig &c)
{
    Json j;
    j["command"] = c.command;
    j["lattice"] = c.lattice;
    j["other_lattice"] = c.other_lattice.empty() ? c.lattice : c.other_lattice;
    j["source"] = c.source;
    j["other_source"] = c.other_source.empty() ? c.source : c.other_source;
    j["family"] = c.family;
    j["chain"] = c.chain;
    j["positions"] = c.positions;
    j["entry"] = c.entry;
    j["method"] = c.method;
    j["exact_p"] = c.exact_p;
    j["trajectory"] = c.trajectory;
    j["p"] = c.p ? Json(*c.p) : Json(nullptr);
    j["p_grid"] = c.p_grid;
    j["N"] = c.N;
    j["k_max"] = c.k_max;
    j["r_max"] = c.r_max;
    j["area"] = c.area;
    j["sum_terms"] = c.sum_terms;
    j["tolerance"] = c.tolerance;
    j["n_samples"] = c.n_samples;
    j["seed"] = c.seed;
    j["override_bound"] = c.override_bound;
    j["format"] = c.format;
    return j;
}

double eigen_residual(const TransferMatrix &v, const EigenTriple &e)
{
    const VectorX r = v.values * e.right - e.lambda * e.right;
    return r.cwiseAbs().maxCoeff() / (e.lambda * e.right.cwiseAbs().maxCoeff());
}

Json cmd_enumerate(const RunConfig &c)
{
    const Lattice lattice = Lattice::parse(c.lattice);
    const std::vector<Vertex> source = parse_vertices(c.source);
    if (c.method != "augment" && c.method != "naive") {
        throw Error(Errc::invalid_argument, "method", "method must be 'augment' or 'naive'");
    }
    EnumerationLimits limits;
    limits.threads = c.threads;
    const CountSeries s = enumerate_counts(lattice, source, c.k_max,
                                           c.method == "naive" ? Enumerator::naive : Enumerator::canonical_augmentation,
                                           limits);
    Json r;
    r["lattice"] = s.lattice.to_string();
    r["s0"] = s.s0();
    r["k_max"] = s.k_max;
    Json coeffs = Json::array();
    for (const BigInt &a : s.coeffs) {
        coeffs.push_back(count_json(a));
    }
    r["coeffs"] = coeffs;
    if (c.p) {
        const AlternatingValue a = series_eval_alternating(s, *c.p);
        r["occupation"] = a.value;
        r["gf_value"] = s.s0() % 2 == 0 ? a.value : -a.value;
        r["truncation_bound"] = a.truncation_bound;
        r["growth_ratio"] = a.growth_ratio;
    }
    return r;
}

Json cmd_gas(const RunConfig &c)
{
    const Lattice lattice = Lattice::parse(c.lattice);
    const std::vector<Vertex> source = parse_vertices(c.source);
    OccupationOptions options;
    options.override_bound = c.override_bound;
    options.threads = c.threads;
    const OccupationEstimate e = estimate_occupation(lattice, source, require_p(c), c.n_samples, c.seed, options);
    Json r;
    r["estimate"] = e.estimate;
    r["stderr"] = e.stderr_;
    r["gf_estimate"] = source.size() % 2 == 0 ? e.estimate : -e.estimate;
    r["samples"] = e.samples;
    r["hits"] = e.hits;
    r["failures"] = e.failures;
    r["violations"] = e.violations;
    return r;
}

Json cmd_chain(const RunConfig &c)
{
    const TransferFamily family = TransferFamily::parse(c.family);
    Json r;
    r["family"] = family.to_string();
    if (c.p) {
        const TransferMatrix v = build_transfer(family, *c.p);
        const EigenTriple e = dominant_eigen(v);
        const ChainSpec limit = limit_chain(v, e);
        r["window"] = v.window;
        r["V"] = matrix_json(v.values);
        r["lambda"] = e.lambda;
        r["left"] = vector_json(e.left);
        r["right"] = vector_json(e.right);
        Json moduli = Json::array();
        for (const auto &z : e.spectrum) {
            moduli.push_back(std::abs(z));
        }
        r["spectrum_modulus"] = moduli;
        r["ratio"] = e.ratio();
        r["eigen_residual"] = eigen_residual(v, e);
        r["limit"] = {{"initial", vector_json(limit.initial)}, {"transition", matrix_json(limit.transition)}};
    }
    if (!c.exact_p.empty()) {
        Rational q;
        try {
            q = Rational(c.exact_p);
        } catch (const std::exception &) {
            throw Error(Errc::parse_error, "exact-p", "not a rational number: '" + c.exact_p + "'");
        }
        const CharPolyReport cp = char_poly_check(family, q);
        Json poly;
        auto strings = [](const std::vector<Rational> &v) {
            Json a = Json::array();
            for (const Rational &x : v) {
                a.push_back(x.str());
            }
            return a;
        };
        poly["p"] = q.str();
        poly["computed"] = strings(cp.computed);
        poly["printed"] = strings(cp.printed);
        poly["printed_matches"] = cp.printed_matches;
        poly["rewrite_matches"] = cp.rewrite_matches;
        poly["lambda"] = cp.lambda;
        Json res;
        for (const auto &[name, value] : cp.residuals) {
            res[name] = value;
        }
        poly["residuals"] = res;
        r["characteristic_polynomial"] = poly;
    }
    if (!c.p && c.exact_p.empty()) {
        throw Error(Errc::invalid_argument, "p", "--p or --exact-p is required for 'chain'");
    }
    return r;
}

Json cmd_cyclic(const RunConfig &c)
{
    const TransferFamily family = TransferFamily::parse(c.family);
    const TransferMatrix v = build_transfer(family, require_p(c));
    const EigenTriple e = dominant_eigen(v);
    const ChainSpec mc = to_cyclic_mc(v, c.N);
    const ChainSpec limit = limit_chain(v, e);
    Json r;
    r["family"] = family.to_string();
    r["N"] = c.N;
    Json marg = Json::array();
    double deviation = 0.0;
    for (std::size_t s = 0; s < mc.states(); ++s) {
        const double m = cyclic_marginal(mc, 0, static_cast<int>(s));
        marg.push_back(m);
        deviation = std::max(deviation, std::abs(m - limit.initial(static_cast<Eigen::Index>(s))));
    }
    r["marginal"] = marg;
    r["limit"] = vector_json(limit.initial);
    r["max_deviation"] = deviation;
    r["predicted_ratio"] = e.ratio();
    if (!c.trajectory.empty()) {
        const std::vector<int> x = parse_ints(c.trajectory, "trajectory");
        r["trajectory"] = x;
        r["cyclic_law"] = cyclic_path_prob(mc, x);
        r["transfer_law"] = transfer_cyclic_law(v, c.N, x);
    }
    return r;
}

Json cmd_linelaw(const RunConfig &c)
{
    const TransferFamily family = TransferFamily::parse(c.family);
    const double p = require_p(c);
    const LineLaw law = stationary_line_law(family, c.N, p);
    const RecurrenceReport rec = recurrence_residual(family, c.N, p);
    Json r;
    r["family"] = family.to_string();
    r["width"] = law.width;
    r["pair"] = law.pair;
    r["convention"] = std::string(to_string(law.convention));
    r["law"] = law.closed;
    r["closed_vs_product"] = law.max_difference;
    r["trace"] = law.trace;
    r["subset_normalizer"] = law.subset_normalizer;
    r["residuals"] = {{"recurrence", rec.residual},
                      {"product_recurrence", rec.product_residual},
                      {"marginal", rec.marginal_residual},
                      {"trace", rec.trace_residual}};
    return r;
}

Json cmd_gf(const RunConfig &c)
{
    const double p = require_p(c);
    Json r;
    if (c.sum_terms > 0) {
        const CompactSum s = compact_source_sum(p, c.sum_terms);
        r["terms"] = s.terms;
        r["partial_sum"] = s.partial;
        r["tail_bound"] = s.tail_bound;
        r["rounding_bound"] = s.rounding_bound;
        r["ratio"] = s.ratio;
        r["reference"] = -p / (1.0 + 4.0 * p);
        r["gap"] = std::abs(s.partial + p / (1.0 + 4.0 * p));
        return r;
    }
    const LineSource source = LineSource::parse(c.chain, parse_ints(c.positions, "positions"));
    Json verts = Json::array();
    for (const Vertex &v : source.vertices()) {
        verts.push_back(to_string(v));
    }
    r["chain"] = source.chain_name();
    r["vertices"] = verts;
    r["probability"] = line_source_prob(source, p);
    r["gf_value"] = gf_value(source, p);
    const TransferMatrix v = build_transfer(source.family(), p);
    r["eigen_residual"] = eigen_residual(v, dominant_eigen(v));
    return r;
}

Json report_json(const AdjudicationReport &rep)
{
    Json j;
    j["entry"] = rep.id;
    j["title"] = rep.title;
    j["applicability"] = rep.applicability;
    j["status"] = std::string(to_string(rep.status));
    j["grid"] = {{"p", rep.options.p_grid}, {"area", rep.options.area}, {"tolerance", rep.options.tolerance}};
    Json vs = Json::array();
    for (const VariantReport &v : rep.variants) {
        Json x;
        x["variant"] = v.name;
        x["printed"] = v.printed;
        x["description"] = v.description;
        x["series"] = {{"variable", rep.variable},
                       {"trusted_order", v.series.trusted_order},
                       {"first_mismatch", v.series.first_mismatch ? Json(*v.series.first_mismatch) : Json(nullptr)},
                       {"leading_residual", v.series.leading_residual},
                       {"agrees", v.series.agrees}};
        Json pts = Json::array();
        for (const PointCheck &pc : v.chain) {
            pts.push_back({{"p", pc.p}, {"residual", pc.residual}, {"agrees", pc.agrees}});
        }
        x["chain"] = pts;
        if (!v.error.empty()) {
            x["error"] = v.error;
        }
        x["agrees"] = v.agrees;
        vs.push_back(x);
    }
    j["variants"] = vs;
    return j;
}

Json cmd_adjudicate(const RunConfig &c)
{
    AdjudicationOptions o;
    if (!c.p_grid.empty()) {
        o.p_grid = c.p_grid;
    }
    o.area = c.area;
    o.tolerance = c.tolerance;
    Json reports = Json::array();
    if (!c.entry.empty()) {
        reports.push_back(report_json(adjudicate(find_formula(c.entry), o)));
    } else {
        for (const AdjudicationReport &r : adjudicate_all(o, c.threads)) {
            reports.push_back(report_json(r));
        }
    }
    return {{"reports", reports}};
}

Json cmd_distance(const RunConfig &c)
{
    const MarkedGraph a{Lattice::parse(c.lattice), parse_vertices(c.source)};
    const MarkedGraph b{Lattice::parse(c.other_lattice.empty() ? c.lattice : c.other_lattice),
                        parse_vertices(c.other_source.empty() ? c.source : c.other_source)};
    const MarkedDistance d = marked_distance(a, b, c.r_max);
    Json r;
    switch (d.kind) {
    case MarkedDistance::Kind::differs_at_root: r["kind"] = "differs_at_root"; break;
    case MarkedDistance::Kind::exact: r["kind"] = "exact"; break;
    case MarkedDistance::Kind::unresolved: r["kind"] = "unresolved"; break;
    }
    r["distance"] = d.value;
    r["agreeing_radius"] = d.agreeing_radius;
    return r;
}

void flatten(const Json &j, const std::string &prefix, std::vector<std::pair<std::string, std::string>> &rows)
{
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], prefix + "." + std::to_string(i), rows);
        }
    } else {
        rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return q + "\"";
}

void write_adjudication_table(const Json &result, std::ostream &out)
{
    for (const Json &rep : result["reports"]) {
        for (const Json &v : rep["variants"]) {
            out << std::left << std::setw(22) << rep["entry"].get<std::string>() << ' ' << std::setw(26)
                << v["variant"].get<std::string>() << ' ' << (v["agrees"].get<bool>() ? "agrees  " : "differs ")
                << "series:";
            const Json &s = v["series"];
            if (s["first_mismatch"].is_null()) {
                out << "zero through " << s["variable"].get<std::string>() << '^' << s["trusted_order"].get<int>();
            } else {
                out << "mismatch at " << s["variable"].get<std::string>() << '^' << s["first_mismatch"].get<int>();
            }
            for (const Json &pc : v["chain"]) {
                out << "  p=" << pc["p"].dump() << " residual=" << pc["residual"].dump();
            }
            if (v.contains("error")) {
                out << "  error: " << v["error"].get<std::string>();
            }
            out << '\n';
        }
        out << rep["entry"].get<std::string>() << ": " << rep["status"].get<std::string>() << '\n';
    }
}

void write(const RunConfig &c, const Json &result, std::ostream &out)
{
    Json doc;
    doc["command"] = c.command;
    doc["config"] = config_json(c);
    doc["result"] = result;
    if (c.format == "json") {
        out << doc.dump(2) << '\n';
        return;
    }
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(doc, "", rows);
    if (c.format == "csv") {
        out << "key,value\n";
        for (const auto &[k, v] : rows) {
            out << csv_field(k) << ',' << csv_field(v) << '\n';
        }
        return;
    }
    if (c.command == "adjudicate") {
        out << "seed: " << c.seed << '\n';
        write_adjudication_table(result, out);
        return;
    }
    std::size_t width = 0;
    for (const auto &row : rows) {
        width = std::max(width, row.first.size());
    }
    for (const auto &[k, v] : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
    }
}

} // namespace

int run(const RunConfig &config, std::ostream &out, std::ostream &err)
{
    try {
        if (config.format != "json" && config.format != "csv" && config.format != "table") {
            throw Error(Errc::invalid_argument, "format", "format must be json, csv or table");
        }
        Json result;
        const std::string &cmd = config.command;
        if (cmd == "enumerate") {
            result = cmd_enumerate(config);
        } else if (cmd == "gas") {
            result = cmd_gas(config);
        } else if (cmd == "chain") {
            result = cmd_chain(config);
        } else if (cmd == "cyclic") {
            result = cmd_cyclic(config);
        } else if (cmd == "linelaw") {
            result = cmd_linelaw(config);
        } else if (cmd == "gf") {
            result = cmd_gf(config);
        } else if (cmd == "adjudicate") {
            result = cmd_adjudicate(config);
        } else if (cmd == "distance") {
            result = cmd_distance(config);
        } else {
            throw Error(Errc::invalid_argument, "command", "unknown command '" + cmd + "'");
        }
        write(config, result, out);
        return 0;
    } catch (const Error &e) {
        err << "error [" << e.field() << "]: " << e.what() << '\n';
        return e.code() == Errc::budget_exceeded ? 3 : 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    RunConfig c;
    CLI::App app{"Directed animals, hard-particle gas and transfer-matrix toolkit"};
    app.require_subcommand(1);
    app.add_option("--format", c.format, "json, csv or table")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads (default: DAGAS_THREADS or all cores)");
    app.add_option("--seed", c.seed, "seed recorded in the output")->capture_default_str();

    double p = 0.0;
    std::vector<CLI::Option *> p_options;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv", "table"}));
        sub->add_option("--threads", c.threads);
        sub->add_option("--seed", c.seed);
    };
    auto add_p = [&](CLI::App *sub) { p_options.push_back(sub->add_option("--p", p, "occupation parameter")); };

    auto *enumerate = app.add_subcommand("enumerate", "count directed animals with a given source");
    enumerate->add_option("--lattice", c.lattice)->capture_default_str();
    enumerate->add_option("--source", c.source, "vertices 'i,j;i,j'")->capture_default_str();
    enumerate->add_option("--kmax", c.k_max)->capture_default_str();
    enumerate->add_option("--method", c.method, "augment or naive")->capture_default_str();
    add_p(enumerate);

    auto *gas = app.add_subcommand("gas", "Monte Carlo estimate of the occupation of a source");
    gas->add_option("--lattice", c.lattice)->capture_default_str();
    gas->add_option("--source", c.source)->capture_default_str();
    gas->add_option("--n", c.n_samples, "samples")->capture_default_str();
    gas->add_flag("--override-bound", c.override_bound, "allow p >= 1/outdegree");
    add_p(gas);

    auto *chain = app.add_subcommand("chain", "transfer matrix, eigen data and limit chain");
    chain->add_option("--family", c.family, "LR:0,1 | TriPair | TriLine | Tn:3")->capture_default_str();
    chain->add_option("--exact-p", c.exact_p, "rational p for the characteristic polynomial, e.g. 1/3");
    add_p(chain);

    auto *cyclic = app.add_subcommand("cyclic", "finite-N cyclic chain marginals and laws");
    cyclic->add_option("--family", c.family)->capture_default_str();
    cyclic->add_option("--N", c.N)->capture_default_str();
    cyclic->add_option("--trajectory", c.trajectory, "states x_0,..,x_{N-1}");
    add_p(cyclic);

    auto *linelaw = app.add_subcommand("linelaw", "stationary line law and fixed-point residuals");
    linelaw->add_option("--family", c.family)->capture_default_str();
    linelaw->add_option("--N", c.N)->capture_default_str();
    add_p(linelaw);

    auto *gf = app.add_subcommand("gf", "source probabilities and GF values from the limit chains");
    gf->add_option("--chain", c.chain, "LR:0,1 | TriMixed | TriLine | Tn:3")->capture_default_str();
    gf->add_option("--positions", c.positions, "chain positions '0,2,5'")->capture_default_str();
    gf->add_option("--compact-sum", c.sum_terms, "sum the compact-source GFs of a triangular line over n terms");
    add_p(gf);

    auto *adjudicate = app.add_subcommand("adjudicate", "check registered closed forms against the oracles");
    adjudicate->add_option("--entry", c.entry, "registry id (all entries when omitted)");
    adjudicate->add_option("--p", c.p_grid, "grid of p values")->expected(1, 16);
    adjudicate->add_option("--area", c.area, "brute-force area bound")->capture_default_str();
    adjudicate->add_option("--tolerance", c.tolerance)->capture_default_str();

    auto *distance = app.add_subcommand("distance", "marked-graph distance between two lattices");
    distance->add_option("--lattice", c.lattice)->capture_default_str();
    distance->add_option("--other", c.other_lattice, "second lattice (default: same)");
    distance->add_option("--source", c.source, "marks of the first lattice")->capture_default_str();
    distance->add_option("--other-source", c.other_source, "marks of the second lattice (default: same)");
    distance->add_option("--rmax", c.r_max)->capture_default_str();

    for (CLI::App *sub : {enumerate, gas, chain, cyclic, linelaw, gf, adjudicate, distance}) {
        add_common(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return 2;
    }
    for (CLI::App *sub : app.get_subcommands()) {
        c.command = sub->get_name();
    }
    for (CLI::Option *o : p_options) {
        if (o->count() > 0) {
            c.p = p;
        }
    }
    return run(c, out, err);
}

} // namespace dagas
