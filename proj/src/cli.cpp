#include "mlv/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlv/counterexample.hpp"
#include "mlv/extend.hpp"
#include "mlv/io.hpp"
#include "mlv/paths.hpp"
#include "mlv/rank.hpp"

namespace mlv {

namespace {

const char* yes_no(bool b) { return b ? "yes" : "no"; }

std::string join_dims(const std::vector<unsigned>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(dims[i]);
    }
    return out;
}

std::string axes_csv(const std::vector<int>& axes) {
    std::string out;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(axes[i] + 1);
    }
    return out;
}

std::string digits_csv(const std::vector<std::uint8_t>& digits) {
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(digits[i]);
    }
    return out;
}

/// Comma-separated residues mod p, e.g. "1,0,2"; `expected` = 0 skips the
/// length check.
std::vector<std::uint8_t> parse_digits(const std::string& text, unsigned p, std::size_t expected,
                                       const std::string& what) {
    if (text.empty()) throw ParseError(what + " must be a comma-separated digit list");
    std::vector<std::uint8_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        if (item.empty() || item.size() > 3 ||
            item.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad digit '" + item + "' in " + what);
        const unsigned long long value = std::stoull(item);
        if (value >= p)
            throw ParseError(what + " digit " + item + " is not a residue modulo " +
                             std::to_string(p));
        out.push_back(static_cast<std::uint8_t>(value));
        pos = comma + 1;
    }
    if (expected != 0 && out.size() != expected)
        throw ParseError(what + " needs " + std::to_string(expected) + " digits, got " +
                         std::to_string(out.size()));
    return out;
}

struct LoadedFile {
    std::string path;
    std::string bytes;
};

LoadedFile load(const std::string& path) { return {path, read_file(path)}; }

void add_input(Report& r, const std::string& key, const LoadedFile& file) {
    r.add(key, file.path);
    r.add(key + "-digest", hex64(fnv1a64(file.bytes)));
}

void add_space(Report& r, const SpaceSignature& sig) {
    r.add("p", static_cast<unsigned long long>(sig.p()));
    r.add("dims", join_dims(sig.dims()));
}

struct RankArgs {
    std::string tensor_file;
    unsigned long long prank_budget = kDefaultPrankBudget;
};

int cmd_rank(const RankArgs& a, std::ostream& out) {
    const LoadedFile file = load(a.tensor_file);
    const MultilinearForm f = parse_tensor(file.bytes);
    // Coordinates outside the axes cannot change the value; analyze the
    // form on the space its axes span.
    const MultilinearForm g = SubSpace(f.sig(), f.axes()).reduce_form(f);

    Report r;
    r.add("command", "rank");
    add_input(r, "input", file);
    add_space(r, f.sig());
    r.add("axes", axes_csv(f.axes()));

    const AnalyticRank ar = analytic_rank(g);
    r.add("bias", ar.bias_value);
    r.add("analytic-rank-exact", yes_no(ar.exact));
    if (ar.exact)
        r.add("analytic-rank", static_cast<long long>(ar.exact_value));
    else
        r.add("analytic-rank", ar.approx);
    if (g.axes().size() == 2)
        r.add("matrix-rank", static_cast<unsigned long long>(matrix_rank(g)));

    const PartitionRankBounds pr = partition_rank_bounds(g, a.prank_budget);
    r.add("partition-rank-lower", static_cast<unsigned long long>(pr.lower));
    r.add("partition-rank-upper", static_cast<unsigned long long>(pr.upper));
    r.add("partition-rank-exact", yes_no(pr.exact));
    r.add("partition-witness-terms", static_cast<unsigned long long>(pr.witness.size()));
    bool verified = true;
    if (pr.witness.empty()) {
        verified = g.is_zero();
    } else {
        for_each_point(g.sig(), [&](const Point& x) {
            if (evaluate_partition_terms(pr.witness, x) != g.evaluate(x)) verified = false;
        });
    }
    r.add("partition-witness-verified", yes_no(verified));
    r.write(out);
    if (!verified) throw AuditFailed("the partition-rank witness does not re-evaluate to the form");
    return 0;
}

struct VarietyArgs {
    std::string variety_file;
    bool diameter = false;
    unsigned rho_index = 1;
};

int cmd_variety(const VarietyArgs& a, std::ostream& out) {
    const LoadedFile file = load(a.variety_file);
    const Variety v = parse_variety(file.bytes);

    Report r;
    r.add("command", "variety");
    add_input(r, "input", file);
    add_space(r, v.sig());
    r.add("codimension", static_cast<unsigned long long>(v.codimension()));
    r.add("points", v.count_points());
    r.add("density-floor", v.density_floor());
    r.add("floor-satisfied", yes_no(v.density_floor_satisfied()));
    r.add("diameter-bound",
          static_cast<unsigned long long>(diameter_bound(static_cast<unsigned>(v.sig().k()))));

    if (a.diameter) {
        if (v.codimension() == 0)
            throw PreconditionFailed(
                "--diameter needs at least one constraint to take as the nonvanishing form");
        if (a.rho_index < 1 || a.rho_index > v.codimension())
            throw ParseError("--rho-index outside 1.." + std::to_string(v.codimension()));
        std::vector<MultilinearForm> zeros;
        for (std::size_t i = 0; i < v.codimension(); ++i)
            if (i + 1 != a.rho_index) zeros.push_back(v.constraints()[i]);
        const RestrictedSet set(v.sig(), std::move(zeros), v.constraints()[a.rho_index - 1]);
        std::vector<std::uint64_t> members;
        for_each_point(v.sig(), [&](const Point& x) {
            if (set.contains(x)) members.push_back(point_rank(v.sig(), x));
        });
        r.add("rho-index", static_cast<unsigned long long>(a.rho_index));
        r.add("cell-points", static_cast<unsigned long long>(members.size()));
        if (members.empty()) {
            r.add("connected", "empty");
        } else {
            const ComponentSummary comp =
                connected_component(set, unrank_point(v.sig(), members.front()));
            const bool connected = comp.ranks.size() == members.size();
            r.add("connected", yes_no(connected));
            r.add("component-points", static_cast<unsigned long long>(comp.ranks.size()));
            if (connected) {
                const std::size_t d = exact_diameter(set);
                r.add("diameter", static_cast<unsigned long long>(d));
                r.add("bound-satisfied",
                      yes_no(d <= diameter_bound(static_cast<unsigned>(v.sig().k()))));
            }
        }
    }
    r.write(out);
    return 0;
}

struct ExtendArgs {
    std::string variety_file;
    std::string map_file;
    std::string global_file;
    std::string rho_file;
    std::string z_text;
    std::string h0_text;
    std::string out_file;
    bool qr = false;
    unsigned bias_exponent_t = 1;
    std::uint64_t seed = 0;
};

int cmd_extend(const ExtendArgs& a, std::ostream& out) {
    const LoadedFile vfile = load(a.variety_file);
    const Variety b = parse_variety(vfile.bytes);

    Report r;
    r.add("command", "extend");
    add_input(r, "variety", vfile);
    add_space(r, b.sig());
    r.add("codimension", static_cast<unsigned long long>(b.codimension()));

    const bool have_map = !a.map_file.empty();
    const bool have_global = !a.global_file.empty();
    if (have_map == have_global)
        throw ParseError("give exactly one of a map file or --restrict-global");

    if (a.qr) {
        if (!have_map) throw ParseError("--qr extends a map file, not --restrict-global");
        if (a.rho_file.empty() || a.z_text.empty() || a.h0_text.empty())
            throw ParseError("--qr needs --rho, --z and --h0");
        const LoadedFile rfile = load(a.rho_file);
        const MultilinearForm rho = parse_tensor(rfile.bytes);
        const LoadedFile mfile = load(a.map_file);
        Variety kernel = b;
        kernel.add_constraint(rho);
        const PartialMultilinearMap phi = assemble_map(parse_map(mfile.bytes), kernel);
        add_input(r, "map", mfile);
        add_input(r, "rho", rfile);
        r.add("mode", "qr");
        const MultilinearCheck check = check_multilinear(phi);
        if (!check.ok)
            throw MultilinearityViolation("the partial map fails a multilinearity law",
                                          check.witness);
        Point z{parse_digits(a.z_text, b.sig().p(), b.sig().flat_size(), "--z")};
        const std::vector<std::uint8_t> h0 =
            parse_digits(a.h0_text, b.sig().p(), phi.codim_h(), "--h0");
        QrOptions opts;
        opts.seed = a.seed;
        opts.audit_seed = a.seed + 1;
        const PartialMultilinearMap psi = qr_extend(b, rho, phi, z, h0, opts);
        const std::string text = serialize_map(map_rows(psi));
        r.add("seed", static_cast<unsigned long long>(a.seed));
        r.add("input-points", static_cast<unsigned long long>(phi.table().size()));
        r.add("result-points", static_cast<unsigned long long>(psi.table().size()));
        r.add("result-digest", hex64(fnv1a64(text)));
        if (!a.out_file.empty()) {
            write_file_atomic(a.out_file, text);
            r.add("output", a.out_file);
        }
        r.write(out);
        return 0;
    }

    std::optional<PartialMultilinearMap> phi;
    if (have_map) {
        const LoadedFile mfile = load(a.map_file);
        phi = assemble_map(parse_map(mfile.bytes), b);
        add_input(r, "map", mfile);
    } else {
        const LoadedFile gfile = load(a.global_file);
        phi = PartialMultilinearMap::restriction(
            b, MultilinearMapH(b.sig(), {parse_tensor(gfile.bytes)}));
        add_input(r, "global", gfile);
    }
    r.add("mode", "pipeline");
    const MultilinearCheck check = check_multilinear(*phi);
    if (!check.ok)
        throw MultilinearityViolation("the partial map fails a multilinearity law", check.witness);

    r.add("map-points", static_cast<unsigned long long>(phi->table().size()));
    r.add("t", static_cast<unsigned long long>(a.bias_exponent_t));
    r.add("seed", static_cast<unsigned long long>(a.seed));
    PipelineOptions options;
    options.step.bias_exponent_t = a.bias_exponent_t;
    options.step.qr.seed = a.seed;
    options.step.qr.audit_seed = a.seed + 1;
    const ExtensionCertificate cert = run_pipeline(*phi, options);
    r.add("completed", yes_no(cert.completed));
    r.add("status", cert.status);
    r.add("stages", static_cast<unsigned long long>(cert.stages.size()));
    if (cert.completed) {
        r.add("global-components", static_cast<unsigned long long>(cert.global_map->codim_h()));
        r.add("agreement-codimension",
              static_cast<unsigned long long>(cert.agreement->codimension()));
        r.add("agreement-points", cert.agreement->count_points());
    }
    const std::string text = serialize_certificate(cert);
    r.add("certificate-digest", hex64(fnv1a64(text)));
    if (!a.out_file.empty()) {
        write_file_atomic(a.out_file, text);
        r.add("certificate", a.out_file);
    }
    r.write(out);
    if (cert.completed) return 0;
    if (cert.failure_kind == "cap") return 3;
    if (cert.failure_kind == "search") return 4;
    if (cert.failure_kind == "audit") return 5;
    return 2;
}

struct CounterexampleArgs {
    unsigned p = 0;
    bool scan = false;
    std::string f_text;
    bool pipeline = false;
    unsigned bias_exponent_t = 1;
    std::uint64_t seed = 0;
};

int cmd_counterexample(const CounterexampleArgs& a, std::ostream& out) {
    require_supported_prime(a.p);
    if (a.scan == !a.f_text.empty()) throw ParseError("give exactly one of --scan or --f");

    Report r;
    r.add("command", "counterexample");
    r.add("p", static_cast<unsigned long long>(a.p));

    if (a.scan) {
        const ScanSummary scan = scan_f_tables(a.p);
        r.add("tables", scan.total);
        r.add("extendable", scan.extendable);
        r.add("non-extendable", scan.non_extendable);
        r.add("first-non-extendable",
              scan.first_non_extendable.empty() ? std::string("none")
                                                : digits_csv(scan.first_non_extendable));
        r.write(out);
        return 0;
    }

    const std::vector<std::uint8_t> f = parse_digits(a.f_text, a.p, a.p - 1, "--f");
    const HyperbolaInstance inst = build_instance(a.p, f);
    r.add("f", digits_csv(f));
    r.add("points", inst.b.count_points());
    r.add("locally-consistent", yes_no(check_multilinear(inst.phi).ok));
    const ExtendabilityDecision decision = global_extension_exists(inst);
    r.add("extendable", yes_no(decision.extendable));
    r.add("equations", static_cast<unsigned long long>(decision.equations));
    r.add("rank", static_cast<unsigned long long>(decision.rank_a));
    if (decision.extendable)
        r.add("witness-coeffs", digits_csv(decision.witness->coeffs()));
    else
        r.add("rank-augmented", static_cast<unsigned long long>(decision.rank_augmented));

    if (a.pipeline) {
        PipelineOptions options;
        options.step.bias_exponent_t = a.bias_exponent_t;
        options.step.qr.seed = a.seed;
        options.step.qr.audit_seed = a.seed + 1;
        const ExtensionCertificate cert = run_pipeline(inst.phi, options);
        r.add("t", static_cast<unsigned long long>(a.bias_exponent_t));
        r.add("pipeline-completed", yes_no(cert.completed));
        r.add("pipeline-status", cert.status);
        if (cert.completed) {
            r.add("agreement-points", cert.agreement->count_points());
            bool zero = true;
            for (const MultilinearForm& c : cert.global_map->components())
                if (!c.is_zero()) zero = false;
            r.add("global-zero", yes_no(zero));
        }
    }
    r.write(out);
    return 0;
}

unsigned long long resolve_cap(bool flag_given, unsigned long long flag_value) {
    unsigned long long cap = kDefaultEnumerationCap;
    if (const char* env = std::getenv("MLV_CAP")) {
        const std::string text(env);
        if (text.empty() || text.size() > 18 ||
            text.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("MLV_CAP must be a positive integer, got '" + text + "'");
        cap = std::stoull(text);
    }
    if (flag_given) cap = flag_value;
    return cap;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"exact toolkit for multilinear forms, varieties and map extension over F_p"};
    app.name("mlv");
    app.require_subcommand(1);

    unsigned long long cap_flag = 0;
    CLI::Option* cap_opt =
        app.add_option("--cap", cap_flag, "enumeration cap in points (overrides MLV_CAP)");

    RankArgs rank_args;
    CLI::App* rank = app.add_subcommand(
        "rank", "bias, analytic rank and partition-rank bounds of a tensor");
    rank->fallthrough();
    rank->add_option("tensor", rank_args.tensor_file, "tensor file")->required();
    rank->add_option("--exact-prank-budget", rank_args.prank_budget,
                     "candidate budget for the exact partition-rank search");

    VarietyArgs variety_args;
    CLI::App* variety =
        app.add_subcommand("variety", "point count, density floor and walk-graph geometry");
    variety->fallthrough();
    variety->add_option("variety", variety_args.variety_file, "variety file")->required();
    variety->add_flag("--diameter", variety_args.diameter,
                      "connectivity and exact diameter of the nonvanishing cell");
    variety->add_option("--rho-index", variety_args.rho_index,
                        "1-based constraint taken as the nonvanishing form (default 1)");

    ExtendArgs extend_args;
    CLI::App* extend =
        app.add_subcommand("extend", "extend a partial multilinear map to a global one");
    extend->fallthrough();
    extend->add_option("variety", extend_args.variety_file, "variety file for the domain")
        ->required();
    extend->add_option("map", extend_args.map_file, "map file with the partial values");
    extend->add_option("--restrict-global", extend_args.global_file,
                       "tensor file; take the partial map as its restriction");
    extend->add_flag("--qr", extend_args.qr,
                     "single-form extension over --rho instead of the full pipeline");
    extend->add_option("--rho", extend_args.rho_file, "tensor file with the distinguished form");
    extend->add_option("--z", extend_args.z_text, "base point digits, e.g. 1,0,1,0");
    extend->add_option("--h0", extend_args.h0_text, "target value at the base point");
    extend->add_option("--t", extend_args.bias_exponent_t,
                       "bias exponent threshold for keeping a combination (default 1)");
    extend->add_option("--seed", extend_args.seed, "walk tie-break seed");
    extend->add_option("--out", extend_args.out_file, "write the certificate or result here");

    CounterexampleArgs cex_args;
    CLI::App* cex = app.add_subcommand(
        "counterexample", "locally consistent quadric maps and their extendability");
    cex->fallthrough();
    cex->add_option("--p", cex_args.p, "prime modulus")->required();
    cex->add_flag("--scan", cex_args.scan, "classify every value table");
    cex->add_option("--f", cex_args.f_text, "value table digits f(1),...,f(p-1)");
    cex->add_flag("--pipeline", cex_args.pipeline, "also run the removal pipeline on the instance");
    cex->add_option("--t", cex_args.bias_exponent_t,
                    "bias exponent threshold for the pipeline run (default 1)");
    cex->add_option("--seed", cex_args.seed, "walk tie-break seed");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mlv");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    try {
        set_enumeration_cap(resolve_cap(cap_opt->count() > 0, cap_flag));
        if (app.got_subcommand(rank))
            code = cmd_rank(rank_args, out);
        else if (app.got_subcommand(variety))
            code = cmd_variety(variety_args, out);
        else if (app.got_subcommand(extend))
            code = cmd_extend(extend_args, out);
        else
            code = cmd_counterexample(cex_args, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        code = 2;
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << "\n";
        code = 3;
    } catch (const BudgetExhausted& e) {
        err << "error: " << e.what() << "\n";
        code = 3;
    } catch (const NotConnected& e) {
        err << "error: " << e.what() << "\n";
        err << "component-a: " << e.component_a << "\n";
        err << "component-b: " << e.component_b << "\n";
        code = 4;
    } catch (const NotFound& e) {
        err << "error: " << e.what() << "\n";
        code = 4;
    } catch (const AuditFailed& e) {
        err << "error: " << e.what() << "\n";
        code = 5;
    } catch (const MultilinearityViolation& e) {
        err << "error: " << e.what() << "\n";
        code = 5;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        code = 2;
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    err << "elapsed-ms: " << elapsed.count() << "\n";
    return code;
}

}  // namespace mlv
