#include "qkdc/cli.hpp"

#include "qkdc/bounds.hpp"
#include "qkdc/divergences.hpp"
#include "qkdc/gaussian.hpp"
#include "qkdc/io.hpp"
#include "qkdc/privstate.hpp"
#include "qkdc/simulate.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace qkdc::cli {

using nlohmann::json;

namespace {

constexpr int kDigits = 12;

using Values = std::map<std::string, double>;

struct Family {
    std::string name;
    std::string help;
    std::vector<std::string> params; // numeric flags, all required unless the family says otherwise
    bool has_kind = false;
    std::function<BoundReport(const Values&, const std::string&)> eval;
};

long as_n(double v) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 9e15) throw std::invalid_argument("n must be a positive integer");
    return static_cast<long>(v);
}

BoundReport gaussian_eval(const Values& v, const std::string& kind) {
    std::vector<std::string> need;
    if (kind == "thermal") need = {"eta", "nb"};
    else if (kind == "pure-loss") need = {"eta"};
    else if (kind == "amplifier") need = {"G", "nb"};
    else if (kind == "ql-amplifier") need = {"G"};
    else if (kind == "additive") need = {"xi"};
    else throw std::invalid_argument("--kind must be one of thermal, pure-loss, amplifier, ql-amplifier, additive");
    json spec{{"kind", kind}};
    for (const char* k : {"eta", "G", "xi", "nb"}) {
        bool wanted = std::find(need.begin(), need.end(), k) != need.end();
        bool given = v.count(k) > 0;
        if (wanted && !given) throw std::invalid_argument(std::string("--") + k + " is required for --kind " + kind);
        if (!wanted && given) throw std::invalid_argument(std::string("--") + k + " does not apply to --kind " + kind);
        if (given) spec[k] = v.at(k);
    }
    return finite_n_bound(bosonic_from_json(spec), as_n(v.at("n")), v.at("eps"));
}

const std::vector<Family>& families() {
    static const std::vector<Family> fams = {
        {"dephasing", "qubit dephasing channel, rate with log n / 2n third term", {"gamma", "n", "eps"}, false,
         [](const Values& v, const std::string&) { return dephasing_boundary(v.at("gamma"), as_n(v.at("n")), v.at("eps")); }},
        {"erasure", "qubit erasure channel, exact finite-n root", {"p", "n", "eps"}, false,
         [](const Values& v, const std::string&) { return erasure_boundary(v.at("p"), as_n(v.at("n")), v.at("eps")); }},
        {"eb", "any entanglement-breaking channel: -log(1-eps)/n", {"n", "eps"}, false,
         [](const Values& v, const std::string&) { return eb_report(as_n(v.at("n")), v.at("eps")); }},
        {"chebyshev", "D + sqrt(2V/(n(1-eps))) + C(eps)/n from given D and V", {"D", "V", "n", "eps"}, false,
         [](const Values& v, const std::string&) {
             return chebyshev_report(v.at("D"), v.at("V"), v.at("eps"), as_n(v.at("n")));
         }},
        {"second-order", "D + sqrt(V/n) Phi^-1(eps) from given D and V", {"D", "V", "n", "eps"}, false,
         [](const Values& v, const std::string&) {
             return second_order_report(v.at("D"), v.at("V"), v.at("eps"), as_n(v.at("n")));
         }},
        {"gaussian", "phase-insensitive bosonic channels (select with --kind)", {"eta", "G", "xi", "nb", "n", "eps"}, true, gaussian_eval},
    };
    return fams;
}

bool family_requires(const Family& f, const std::string& p) {
    if (f.name == "gaussian") return p == "n" || p == "eps";
    return true;
}

struct Output {
    std::string format = "json";
    std::string path;
};

void emit(const Output& o, const std::string& text, std::ostream& out) {
    if (o.path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.path);
    if (!f) throw std::invalid_argument("cannot write " + o.path);
    f << text;
}

std::string reports_text(const std::vector<BoundReport>& rs, const std::string& format, bool single) {
    std::ostringstream os;
    if (format == "csv") {
        os << csv_header() << "\n";
        for (const auto& r : rs) os << to_csv_row(r, kDigits) << "\n";
    } else if (single) {
        os << to_json(rs.front(), kDigits).dump(2) << "\n";
    } else {
        json arr = json::array();
        for (const auto& r : rs) arr.push_back(to_json(r, kDigits));
        os << arr.dump(2) << "\n";
    }
    return os.str();
}

json num(double x) {
    if (std::isinf(x)) return nullptr;
    return round_sig(x, kDigits);
}

std::string scalar_text(const std::string& format, const std::vector<std::pair<std::string, json>>& fields) {
    std::ostringstream os;
    if (format == "csv") {
        for (size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i].first;
        os << "\n";
        for (size_t i = 0; i < fields.size(); ++i) {
            os << (i ? "," : "");
            const json& v = fields[i].second;
            if (v.is_null()) os << "inf";
            else if (v.is_number_float()) os << format_number(v.get<double>(), kDigits);
            else if (v.is_string()) os << v.get<std::string>();
            else os << v.dump();
        }
        os << "\n";
    } else {
        json j = json::object();
        for (const auto& [k, v] : fields) j[k] = v;
        os << j.dump(2) << "\n";
    }
    return os.str();
}

std::vector<double> make_grid(double lo, double hi, int steps, bool log_spaced, bool integer) {
    if (steps < 1) throw std::invalid_argument("sweep: --steps must be at least 1");
    if (!(lo <= hi)) throw std::invalid_argument("sweep: empty grid (--min exceeds --max)");
    if (log_spaced && !(lo > 0.0)) throw std::invalid_argument("sweep: a log grid needs --min > 0");
    std::vector<double> g;
    for (int i = 0; i < steps; ++i) {
        double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        double x = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
        if (i == steps - 1) x = hi;
        if (integer) x = std::round(x);
        if (g.empty() || x != g.back()) g.push_back(x);
    }
    if (integer && g.front() < 1.0) throw std::invalid_argument("sweep: n grid must start at 1 or above");
    return g;
}

std::vector<BoundReport> parallel_eval(const Family& fam, const Values& fixed, const std::string& kind,
                                       const std::string& param, const std::vector<double>& grid) {
    std::vector<BoundReport> out(grid.size());
    std::vector<std::exception_ptr> errs(grid.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < grid.size(); i = next++) {
            try {
                Values v = fixed;
                v[param] = grid[i];
                out[i] = fam.eval(v, kind);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    unsigned nt = std::min<unsigned>(thread_cap(), static_cast<unsigned>(grid.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

struct FamilyOpts {
    std::map<std::string, double> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string kind;
    CLI::Option* kind_opt = nullptr;

    Values given() const {
        Values v;
        for (const auto& [k, o] : opts)
            if (o->count()) v[k] = raw.at(k);
        return v;
    }
};

void add_family_opts(CLI::App* sub, const Family& fam, FamilyOpts& fo) {
    for (const auto& p : fam.params) {
        fo.raw[p] = 0.0;
        fo.opts[p] = sub->add_option("--" + p, fo.raw[p], p);
    }
    if (fam.has_kind)
        fo.kind_opt = sub->add_option("--kind", fo.kind, "thermal|pure-loss|amplifier|ql-amplifier|additive")->required();
}

void add_output_opts(CLI::App* sub, Output& o) {
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output,-o", o.path, "write to this file instead of stdout");
}

} // namespace

unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QKDC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
    }
    return hw;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-blocklength key and entanglement distillation bounds"};
    app.require_subcommand(1);
    std::function<void()> action;
    Output output;

    // bound <family>
    CLI::App* bound = app.add_subcommand("bound", "evaluate one bound");
    bound->require_subcommand(1);
    std::map<std::string, FamilyOpts> bound_opts;
    for (const auto& fam : families()) {
        CLI::App* sub = bound->add_subcommand(fam.name, fam.help);
        add_family_opts(sub, fam, bound_opts[fam.name]);
        add_output_opts(sub, output);
        sub->callback([&, name = fam.name] {
            action = [&, name] {
                const Family& f = *std::find_if(families().begin(), families().end(), [&](const Family& x) { return x.name == name; });
                FamilyOpts& fo = bound_opts[name];
                Values v = fo.given();
                for (const auto& p : f.params)
                    if (family_requires(f, p) && !v.count(p)) throw std::invalid_argument("--" + p + " is required");
                emit(output, reports_text({f.eval(v, fo.kind)}, output.format, true), out);
            };
        });
    }

    // sweep <family>
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate a bound over a one-parameter grid (CSV by default)");
    sweep->require_subcommand(1);
    std::map<std::string, FamilyOpts> sweep_opts;
    std::string sweep_param;
    double sweep_min = 0.0, sweep_max = 0.0;
    int sweep_steps = 0;
    bool sweep_log = false;
    Output sweep_output;
    sweep_output.format = "csv";
    for (const auto& fam : families()) {
        CLI::App* sub = sweep->add_subcommand(fam.name, fam.help);
        add_family_opts(sub, fam, sweep_opts[fam.name]);
        add_output_opts(sub, sweep_output);
        sub->add_option("--param", sweep_param, "swept parameter")->required();
        sub->add_option("--min", sweep_min)->required();
        sub->add_option("--max", sweep_max)->required();
        sub->add_option("--steps", sweep_steps)->required();
        sub->add_flag("--log", sweep_log, "log-spaced grid");
        sub->callback([&, name = fam.name] {
            action = [&, name] {
                const Family& f = *std::find_if(families().begin(), families().end(), [&](const Family& x) { return x.name == name; });
                FamilyOpts& fo = sweep_opts[name];
                if (std::find(f.params.begin(), f.params.end(), sweep_param) == f.params.end())
                    throw std::invalid_argument("--param " + sweep_param + " is not a parameter of " + name);
                Values v = fo.given();
                if (v.count(sweep_param)) throw std::invalid_argument("--" + sweep_param + " is swept and must not be fixed");
                for (const auto& p : f.params)
                    if (p != sweep_param && family_requires(f, p) && !v.count(p))
                        throw std::invalid_argument("--" + p + " is required");
                auto grid = make_grid(sweep_min, sweep_max, sweep_steps, sweep_log, sweep_param == "n");
                auto rs = parallel_eval(f, v, fo.kind, sweep_param, grid);
                emit(sweep_output, reports_text(rs, sweep_output.format, false), out);
            };
        });
    }

    // dh
    std::string rho_path, sigma_path;
    double eps = 0.0;
    CLI::App* dh = app.add_subcommand("dh", "hypothesis-testing relative entropy D_H^eps(rho||sigma)");
    dh->add_option("--rho", rho_path)->required();
    dh->add_option("--sigma", sigma_path)->required();
    dh->add_option("--eps", eps)->required();
    add_output_opts(dh, output);
    dh->callback([&] {
        action = [&] {
            auto r = hypothesis_test_divergence(read_state(rho_path), read_state(sigma_path), eps);
            emit(output, scalar_text(output.format, {{"eps", num(eps)}, {"value_bits", num(r.value)}, {"infinite", r.infinite()}}), out);
        };
    });

    // divergence
    std::string div_kind;
    double alpha = 0.0;
    CLI::App* dv = app.add_subcommand("divergence", "relative entropy, its variance, sandwiched Renyi or max divergence");
    dv->add_option("--kind", div_kind)->required()->check(CLI::IsMember({"relative", "variance", "renyi", "max"}));
    dv->add_option("--rho", rho_path)->required();
    dv->add_option("--sigma", sigma_path)->required();
    CLI::Option* alpha_opt = dv->add_option("--alpha", alpha);
    add_output_opts(dv, output);
    dv->callback([&] {
        action = [&] {
            if ((div_kind == "renyi") != (alpha_opt->count() > 0))
                throw std::invalid_argument("--alpha is required for --kind renyi and only for it");
            DensityOperator r = read_state(rho_path), s = read_state(sigma_path);
            double v = 0.0;
            if (div_kind == "relative") v = rel_entropy(r, s);
            else if (div_kind == "variance") v = rel_entropy_variance(r, s);
            else if (div_kind == "renyi") v = sandwiched_renyi(r, s, alpha);
            else v = max_relative_entropy(r, s);
            std::vector<std::pair<std::string, json>> fields{{"kind", div_kind}};
            if (div_kind == "renyi") fields.push_back({"alpha", num(alpha)});
            fields.push_back({div_kind == "variance" ? "value_bits2" : "value_bits", num(v)});
            emit(output, scalar_text(output.format, fields), out);
        };
    });

    // privacy-test
    int K = 0;
    std::string shield_path, twist = "random";
    std::uint64_t seed = 0;
    CLI::App* pt = app.add_subcommand("privacy-test", "probability that rho passes the privacy test of a private state");
    pt->add_option("--rho", rho_path)->required();
    pt->add_option("--K", K)->required();
    pt->add_option("--shield", shield_path)->required();
    pt->add_option("--twist", twist)->check(CLI::IsMember({"random", "trivial"}));
    pt->add_option("--seed", seed, "seed for the random twist (default 0)");
    add_output_opts(pt, output);
    pt->callback([&] {
        action = [&] {
            if (K < 2) throw std::invalid_argument("--K must be at least 2");
            DensityOperator shield = read_state(shield_path);
            Rng rng(seed);
            auto tw = twist == "trivial" ? PrivateState::trivial_twist(K, shield.dim())
                                         : PrivateState::random_twist(K, shield.dim(), rng);
            PrivateState gamma(K, tw, shield);
            double p = privacy_test(gamma, read_state(rho_path));
            emit(output, scalar_text(output.format, {{"K", K}, {"twist", twist}, {"seed", seed}, {"pass_probability", num(p)}}), out);
        };
    });

    // simulate
    std::string channel_spec;
    CLI::App* sim = app.add_subcommand("simulate", "teleportation simulation of a covariant channel on a state");
    sim->add_option("--channel", channel_spec, "JSON text or file, e.g. {\"kind\":\"dephasing\",\"gamma\":0.3}")->required();
    sim->add_option("--rho", rho_path)->required();
    add_output_opts(sim, output);
    sim->callback([&] {
        action = [&] {
            ChannelFamily fam = channel_from_json(load_json(channel_spec));
            CovariantChannelSpec spec = covariant_spec(fam);
            DensityOperator rho = read_state(rho_path);
            DensityOperator sim_out = teleport_simulate(spec, rho);
            double td = trace_distance(sim_out.matrix(), spec.channel().apply(rho.matrix()));
            if (output.format == "csv") {
                std::ostringstream os;
                os << "row,col,re,im\n";
                for (Eigen::Index r = 0; r < sim_out.dim(); ++r)
                    for (Eigen::Index c = 0; c < sim_out.dim(); ++c)
                        os << r << ',' << c << ',' << format_number(sim_out.matrix()(r, c).real(), kDigits) << ','
                           << format_number(sim_out.matrix()(r, c).imag(), kDigits) << "\n";
                emit(output, os.str(), out);
            } else {
                json j{{"channel", to_string(fam.kind)},
                       {"output", matrix_to_json(sim_out.matrix(), sim_out.dims(), kDigits)},
                       {"trace_distance_to_direct", num(td)}};
                emit(output, j.dump(2) + "\n", out);
            }
        };
    });

    try {
        app.parse(argc, argv);
        action();
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"qkdc"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace qkdc::cli
