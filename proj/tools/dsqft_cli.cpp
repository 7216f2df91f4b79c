// Batch front end: decomposition, tables, the field sampler and the acceptance runner.
// Exit codes: 0 success / all checks pass, 1 usage or input error (or a failed check), 2 mathematical domain error.

#include <CLI11.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "checks/suite.hpp"
#include "dsqft/ds_geometry.hpp"
#include "dsqft/errors.hpp"
#include "dsqft/euclid_field.hpp"
#include "dsqft/one_particle.hpp"
#include "dsqft/so12_group.hpp"
#include "dsqft/special_functions.hpp"
#include "dsqft/uir_circle.hpp"

using json = nlohmann::json;
using std::numbers::pi;
namespace grp = dsqft::group;
namespace op = dsqft::oneparticle;
namespace eu = dsqft::euclid;

namespace {

struct Global {
    std::string format;  // empty: csv for tables, json for record output
    std::string out;
};

class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw dsqft::ContractError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

// Numeric table, written as CSV with a fixed header or as one JSON object per row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void write(std::ostream& os, const std::string& format) const {
        if (format != "json") {
            for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
            os << '\n';
            for (const auto& r : rows) {
                for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
                os << '\n';
            }
        } else {
            for (const auto& r : rows) {
                json j = json::object();
                for (std::size_t i = 0; i < r.size(); ++i) j[header[i]] = r[i];
                os << j.dump() << '\n';
            }
        }
    }
};

void require_json(const Global& g, const char* cmd) {
    if (g.format == "csv") throw dsqft::ContractError(std::string(cmd) + " writes JSON only; pass --format json");
}

std::vector<double> parse_reals(const std::string& text) {
    std::string s = text;
    for (char& c : s)
        if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
    std::istringstream in(s);
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double x = 0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw dsqft::ContractError("malformed number '" + tok + "'");
        }
        if (used != tok.size()) throw dsqft::ContractError("malformed number '" + tok + "'");
        v.push_back(x);
    }
    return v;
}

// ---------------------------------------------------------------------------------------- decompose

std::array<double, 9> nine(const std::vector<double>& v) {
    if (v.size() != 9) throw dsqft::ContractError("expected 9 matrix entries, got " + std::to_string(v.size()));
    std::array<double, 9> a;
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

double z(double x) { return x + 0.0; }  // no negative zeros in reports

double recomposition_error(const grp::GroupElement& a, const grp::GroupElement& g) { return (a.m - g.m).cwiseAbs().maxCoeff(); }

// returns true when the element lies in the Hannabuss exceptional set
bool decompose_one(const grp::GroupElement& g, json& rec) {
    rec["matrix"] = g.row_major();
    rec["metric_defect"] = g.metric_defect();
    auto iw = grp::iwasawa_decompose(g);
    rec["iwasawa"] = {{"alpha", z(iw.alpha)}, {"k", iw.k}, {"t", z(iw.t)}, {"q", z(iw.q)}, {"error", recomposition_error(grp::compose(iw), g)}};
    auto ca = grp::cartan_decompose(g);
    rec["cartan"] = {{"alpha", z(ca.alpha)}, {"t", z(ca.t)}, {"alpha_prime", z(ca.alpha_prime)}, {"error", recomposition_error(grp::compose(ca), g)}};
    try {
        auto hb = grp::hannabuss_decompose(g);
        rec["hannabuss"] = {{"s", z(hb.s)}, {"k", hb.k}, {"t", z(hb.t)}, {"q", z(hb.q)}, {"error", recomposition_error(grp::compose(hb), g)}};
        return false;
    } catch (const dsqft::ExceptionalSetError& e) {
        rec["hannabuss"] = nullptr;
        rec["exceptional"] = e.what();
        return true;
    }
}

grp::GroupElement from_factors(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw dsqft::ContractError("factors must look like iwasawa:alpha,t,q");
    const std::string kind = spec.substr(0, colon);
    auto v = parse_reals(spec.substr(colon + 1));
    if (v.size() != 3) throw dsqft::ContractError("expected three factors after '" + kind + ":'");
    if (kind == "iwasawa") return grp::compose(grp::IwasawaFactors{v[0], 0, v[1], v[2]});
    if (kind == "cartan") return grp::compose(grp::CartanFactors{v[0], v[1], v[2]});
    if (kind == "hannabuss") return grp::compose(grp::HannabussFactors{v[0], 0, v[1], v[2]});
    throw dsqft::ContractError("unknown factorization '" + kind + "'");
}

// A file holds one matrix (9 reals), a JSON object with "matrix", or a JSON array / JSON lines of such objects.
std::vector<std::array<double, 9>> read_matrices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dsqft::ContractError("cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<std::array<double, 9>> out;
    auto take = [&](const json& j) {
        if (j.is_object() && j.contains("matrix")) out.push_back(nine(j["matrix"].get<std::vector<double>>()));
        else if (j.is_array() && j.size() == 9 && j[0].is_number()) out.push_back(nine(j.get<std::vector<double>>()));
        else throw dsqft::ContractError("expected an object with \"matrix\" or an array of 9 reals");
    };
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        try {
            json j = json::parse(text);
            if (j.is_array() && !j.empty() && j[0].is_object()) {
                for (const auto& e : j) take(e);
            } else {
                take(j);
            }
            return out;
        } catch (const json::parse_error&) {
            // JSON lines
            std::istringstream lines(text);
            std::string line;
            while (std::getline(lines, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                try {
                    take(json::parse(line));
                } catch (const json::exception& e) {
                    throw dsqft::ContractError(std::string("malformed JSON: ") + e.what());
                }
            }
            return out;
        } catch (const json::exception& e) {
            throw dsqft::ContractError(std::string("malformed JSON: ") + e.what());
        }
    }
    out.push_back(nine(parse_reals(text)));
    return out;
}

// ----------------------------------------------------------------------------------------- rep

grp::GroupElement named_element(const std::string& spec) {
    auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    double x = 0;
    if (colon != std::string::npos) {
        auto v = parse_reals(spec.substr(colon + 1));
        if (v.size() != 1) throw dsqft::ContractError("element parameter must be one real");
        x = v[0];
    }
    if (name == "rotate0") return grp::rotate0(x);
    if (name == "boost1") return grp::boost1(x);
    if (name == "boost2") return grp::boost2(x);
    if (name == "horo") return grp::horo(x);
    throw dsqft::ContractError("unknown element '" + name + "' (rotate0, boost1, boost2, horo)");
}

// ----------------------------------------------------------------------------------------- sample

struct Observable {
    std::string name;
    std::function<double(const eu::SampleRecord&)> value;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsqft: free and P(phi) fields on the two-dimensional de Sitter space"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--format", g.format, "csv or json (JSON is newline-delimited); tables default to csv")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", g.out, "write to this file instead of stdout");

    double mu = 1.0, r = 1.0;
    auto add_model = [&](CLI::App* c) {
        c->add_option("--mu", mu, "mass")->check(CLI::PositiveNumber)->capture_default_str();
        c->add_option("--r", r, "de Sitter radius")->check(CLI::PositiveNumber)->capture_default_str();
    };
    std::uint64_t seed = 20240917;

    // decompose
    auto* dec = app.add_subcommand("decompose", "Iwasawa, Cartan and Hannabuss factors of a group element");
    std::string dec_matrix, dec_file, dec_factors;
    auto* o_matrix = dec->add_option("--matrix", dec_matrix, "9 reals, row-major, comma or space separated");
    auto* o_file = dec->add_option("--file", dec_file, "matrix file: 9 reals, {\"matrix\": [...]}, or a JSON array / JSON lines of those");
    auto* o_factors = dec->add_option("--factors", dec_factors, "iwasawa:alpha,t,q | cartan:alpha,t,alpha' | hannabuss:s,t,q");
    o_matrix->excludes(o_file)->excludes(o_factors);
    o_file->excludes(o_factors);

    // geometry
    auto* geo = app.add_subcommand("geometry", "dependence intervals over a (psi, tau) grid");
    int grid = 20;
    double tau_max = 3.0;
    geo->add_option("--r", r, "de Sitter radius")->check(CLI::PositiveNumber)->capture_default_str();
    geo->add_option("--grid", grid, "points per axis")->check(CLI::Range(2, 100000))->capture_default_str();
    geo->add_option("--tau-max", tau_max, "rapidity range [-tau_max, tau_max]")->capture_default_str();

    // specfun
    auto* spf = app.add_subcommand("specfun", "Fourier coefficients and values of P_s(-cos psi), s = -1/2 - i nu");
    add_model(spf);
    std::string table = "coeff";
    int kmax = 40, sf_grid = 64;
    spf->add_option("--table", table, "coeff (p(k)), prime (p^1(k)) or kernel (P_s(-cos psi))")
        ->check(CLI::IsMember({"coeff", "prime", "kernel"}))
        ->capture_default_str();
    spf->add_option("--kmax", kmax, "largest |k|")->check(CLI::NonNegativeNumber)->capture_default_str();
    spf->add_option("--grid", sf_grid, "psi points for the kernel table")->check(CLI::Range(2, 1000000))->capture_default_str();

    // rep
    auto* rep = app.add_subcommand("rep", "apply a group element in the principal or complementary series");
    double rep_nu = 0.5;
    std::optional<double> rep_kappa;
    std::optional<int> rep_harmonic;
    std::string element = "boost2:0.5";
    int rep_grid = 64;
    rep->add_option("--nu", rep_nu, "principal series label")->capture_default_str();
    rep->add_option("--kappa", rep_kappa, "complementary series label, 0 < |kappa| < 1/2 (overrides --nu)");
    rep->add_option("--element", element, "rotate0:a | boost1:t | boost2:s | horo:q")->capture_default_str();
    rep->add_option("--grid", rep_grid, "samples on the circle, a power of two")->capture_default_str();
    rep->add_option("--harmonic", rep_harmonic, "act on e^{ik alpha} instead of the default bump exp(2 cos(alpha - 1))");

    // dispersion
    auto* dis = app.add_subcommand("dispersion", "omega~(k) against the flat dispersion");
    add_model(dis);
    int dis_kmax = 128;
    dis->add_option("--kmax", dis_kmax, "largest k")->check(CLI::NonNegativeNumber)->capture_default_str();

    // covariance
    auto* cov = app.add_subcommand("covariance", "sharp-time covariance kernel in the eigenbasis of eps");
    add_model(cov);
    double theta = 0.0;
    int cov_grid = 512;
    cov->add_option("--theta", theta, "Euclidean boost angle")->capture_default_str();
    cov->add_option("--grid", cov_grid, "finite-volume cells M on I+")->check(CLI::Range(8, 1 << 16))->capture_default_str();

    // sample
    auto* smp = app.add_subcommand("sample", "Gaussian samples on the sphere reweighted by exp(-V)");
    add_model(smp);
    int L = 16;
    std::optional<int> L_int;
    std::size_t n_samples = 10000, batch = 1000;
    std::string poly = "0";
    auto* o_L = smp->add_option("--L", L, "mode cutoff of the field")->check(CLI::Range(0, 4096));
    smp->add_option("--modes", L, "same as --L")->excludes(o_L)->check(CLI::Range(0, 4096));
    smp->add_option("--L-int", L_int, "cutoff of the interaction (default: --L)");
    smp->add_option("--n-samples", n_samples, "total samples")->capture_default_str();
    smp->add_option("--batch", batch, "samples per reported batch (at least 1000)")->capture_default_str();
    smp->add_option("--seed", seed, "64-bit seed")->capture_default_str();
    smp->add_option("--poly", poly, "coefficients of :phi^0:, :phi^2:, :phi^4:, ... (comma separated)")->capture_default_str();

    // rp-check
    auto* rpc = app.add_subcommand("rp-check", "reflected Gram matrix of upper-hemisphere bumps");
    add_model(rpc);
    int rp_L = 200, rp_n = 20, rp_bases = 1;
    rpc->add_option("--modes", rp_L, "mode cutoff")->check(CLI::Range(1, 2000))->capture_default_str();
    rpc->add_option("--n-functions", rp_n, "bumps per basis")->check(CLI::Range(1, 1000))->capture_default_str();
    rpc->add_option("--bases", rp_bases, "number of random bases")->check(CLI::Range(1, 100000))->capture_default_str();
    rpc->add_option("--seed", seed, "64-bit seed")->capture_default_str();

    // check
    auto* chk = app.add_subcommand("check", "run an acceptance suite; exit 0 iff every criterion passes");
    std::string suite = "all";
    bool chk_json = false;
    chk->add_option("suite", suite, "group, geometry, specfun, rep, oneparticle, euclid or all")->capture_default_str();
    add_model(chk);
    chk->add_option("--seed", seed, "seed of the Monte Carlo criteria")->capture_default_str();
    chk->add_flag("--json", chk_json, "same as --format json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        Sink sink(g.out);
        std::ostream& os = sink.os();
        os.precision(17);

        if (dec->parsed()) {
            require_json(g, "decompose");
            std::vector<grp::GroupElement> elems;
            if (!dec_matrix.empty()) {
                elems.push_back(grp::GroupElement::from_row_major(nine(parse_reals(dec_matrix))));
            } else if (!dec_file.empty()) {
                for (const auto& a : read_matrices(dec_file)) elems.push_back(grp::GroupElement::from_row_major(a));
            } else if (!dec_factors.empty()) {
                elems.push_back(from_factors(dec_factors));
            } else {
                throw dsqft::ContractError("give --matrix, --file or --factors");
            }
            bool exceptional = false;
            for (const auto& e : elems) {
                json rec;
                exceptional = decompose_one(e, rec) || exceptional;
                os << rec.dump() << '\n';
            }
            if (exceptional) {
                std::cerr << "dsqft: element in the Hannabuss exceptional set\n";
                return 2;
            }
            return 0;
        }

        if (geo->parsed()) {
            Table t{{"psi", "tau", "center", "half_width"}, {}};
            for (int i = 0; i < grid; ++i) {
                const double psi = -pi / 2 + pi * (i + 0.5) / grid;
                for (int j = 0; j < grid; ++j) {
                    const double tau = -tau_max + 2 * tau_max * j / (grid - 1);
                    auto d = dsqft::geometry::dependence_interval(psi, tau, r);
                    t.rows.push_back({psi, tau, d.center, d.half_width});
                }
            }
            t.write(os, g.format);
            return 0;
        }

        if (spf->parsed()) {
            auto p = op::ModelParams::make(mu, r);
            auto d = p.degree();
            if (table == "kernel") {
                dsqft::special::LegendreSeries series(d);
                Table t{{"psi", "re", "im"}, {}};
                for (int j = 1; j < sf_grid; ++j) {
                    const double psi = 2 * pi * j / sf_grid;
                    auto v = series.value_psi(psi);
                    t.rows.push_back({psi, v.real(), v.imag()});
                }
                t.write(os, g.format);
            } else {
                Table t{{"k", "re", "im"}, {}};
                for (int k = -kmax; k <= kmax; ++k) {
                    auto v = table == "coeff" ? dsqft::special::legendre_coeff(d, k) : dsqft::special::legendre_prime_coeff(d, k);
                    t.rows.push_back({double(k), v.real(), v.imag()});
                }
                t.write(os, g.format);
            }
            return 0;
        }

        if (rep->parsed()) {
            if (rep_grid < 2 || (rep_grid & (rep_grid - 1)) != 0) throw dsqft::ContractError("--grid must be a power of two");
            auto lab = rep_kappa ? dsqft::uir::SeriesLabel::complementary(*rep_kappa) : dsqft::uir::SeriesLabel::principal(rep_nu);
            auto ge = named_element(element);
            std::function<std::complex<double>(double)> f = [](double a) { return std::complex<double>(std::exp(2 * std::cos(a - 1))); };
            if (rep_harmonic) {
                const int k = *rep_harmonic;
                f = [k](double a) { return std::exp(std::complex<double>(0, k * a)); };
            }
            auto h = dsqft::uir::CircleFunction::from_function(f, rep_grid);
            auto uh = dsqft::uir::act(lab, ge, h);
            Table t{{"alpha", "before_re", "before_im", "after_re", "after_im"}, {}};
            for (int j = 0; j < h.size(); ++j)
                t.rows.push_back({h.angle(j), h.values[std::size_t(j)].real(), h.values[std::size_t(j)].imag(),
                                  uh.values[std::size_t(j)].real(), uh.values[std::size_t(j)].imag()});
            t.write(os, g.format);
            return 0;
        }

        if (dis->parsed()) {
            auto p = op::ModelParams::make(mu, r);
            Table t{{"k", "omega", "flat_omega", "ratio"}, {}};
            for (int k = 0; k <= dis_kmax; ++k) {
                double w = op::dispersion(p, k), f = op::flat_dispersion(p, k);
                t.rows.push_back({double(k), w, f, w / f});
            }
            t.write(os, g.format);
            return 0;
        }

        if (cov->parsed()) {
            auto e = op::build_epsilon(op::ModelParams::make(mu, r), cov_grid);
            Table t{{"n", "eps", "kernel"}, {}};
            for (int n = 0; n < e.size(); ++n) {
                const double x = e.eps()(n);
                t.rows.push_back({double(n), x, op::sharp_time_kernel(theta, x)});
            }
            t.write(os, g.format);
            return 0;
        }

        if (smp->parsed()) {
            require_json(g, "sample");
            if (batch < 1000) throw dsqft::ContractError("--batch must be at least 1000 (reweighting needs that many samples)");
            auto p = op::ModelParams::make(mu, r);
            eu::SampleBatchSpec spec;
            spec.L = L;
            spec.L_int = L_int.value_or(L);
            spec.P = eu::WickPolynomial::parse(poly);
            spec.n_samples = n_samples;
            spec.seed = seed;
            const auto a = eu::sphere_point(1.0, 0.5, 0.3), b = eu::sphere_point(1.0, 1.4, 2.0);
            spec.observables = {eu::vmf_bump(a, 4.0, L), eu::vmf_bump(b, 4.0, L)};
            auto rec = eu::run_samples(p, spec);
            const std::vector<Observable> obs = {
                {"phi", [](const eu::SampleRecord& s) { return s.phi[0]; }},
                {"phi_sq", [](const eu::SampleRecord& s) { return s.phi[0] * s.phi[0]; }},
                {"two_point", [](const eu::SampleRecord& s) { return s.phi[0] * s.phi[1]; }},
            };
            for (std::size_t start = 0, bi = 0; start < rec.size(); start += batch, ++bi) {
                const std::size_t end = std::min(rec.size(), start + batch);
                if (end - start < 1000) {
                    std::cerr << "dsqft: dropping a final batch of " << end - start << " samples (fewer than 1000)\n";
                    break;
                }
                std::vector<double> V;
                for (std::size_t i = start; i < end; ++i) V.push_back(rec[i].V);
                json j{{"batch", bi}, {"n", end - start}};
                json o = json::object();
                eu::Reweighted last;
                for (const auto& ob : obs) {
                    std::vector<double> x;
                    for (std::size_t i = start; i < end; ++i) x.push_back(ob.value(rec[i]));
                    last = eu::reweighted_expectation(V, x);
                    o[ob.name] = {{"value", last.value}, {"stderr", last.stderr_}};
                }
                j["Z_hat"] = last.z_hat;
                j["Z_stderr"] = last.z_stderr;
                j["ess"] = last.ess;
                if (!last.warning.empty()) j["warning"] = last.warning;
                j["observables"] = o;
                os << j.dump() << '\n';
            }
            return 0;
        }

        if (rpc->parsed()) {
            require_json(g, "rp-check");
            auto p = op::ModelParams::make(mu, r);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> th(0, pi / 4), ps(0, 2 * pi), kap(80, 200);
            for (int basis = 0; basis < rp_bases; ++basis) {
                std::vector<eu::SphereModes> fns;
                for (int i = 0; i < rp_n; ++i) fns.push_back(eu::vmf_bump(eu::sphere_point(1.0, th(rng), ps(rng)), kap(rng), rp_L));
                auto rep_ = eu::reflection_positivity_gram(p, fns, rp_L);
                os << json{{"basis", basis}, {"lambda_min", rep_.lambda_min}, {"gram_norm", rep_.gram_norm},
                           {"ratio", rep_.lambda_min / rep_.gram_norm}}.dump()
                   << '\n';
            }
            return 0;
        }

        if (chk->parsed()) {
            dsqft::checks::SuiteOptions opt;
            opt.mu = mu;
            opt.r = r;
            opt.seed = seed;
            auto results = dsqft::checks::run_suite(suite, opt);
            const bool as_json = chk_json || g.format != "csv";
            bool all = true;
            if (!as_json) os << "id,suite,criterion,measured,tolerance,pass,seconds\n";
            for (const auto& res : results) {
                const auto& h = res.headline();
                all = all && res.pass();
                if (as_json) {
                    json parts = json::array();
                    for (const auto& m : res.parts)
                        parts.push_back({{"name", m.name}, {"measured", m.measured}, {"tolerance", m.tolerance},
                                         {"bound", m.upper ? "upper" : "lower"}, {"pass", m.pass()}});
                    os << json{{"criterion", res.criterion}, {"id", res.id},           {"suite", res.suite},
                               {"measured", h.measured},     {"tolerance", h.tolerance}, {"bound", h.upper ? "upper" : "lower"},
                               {"pass", res.pass()},         {"seconds", res.seconds}, {"budget_seconds", res.budget_seconds},
                               {"parts", parts}}
                              .dump()
                       << '\n';
                } else {
                    os << res.id << ',' << res.suite << ",\"" << res.criterion << "\"," << num(h.measured) << ','
                       << num(h.tolerance) << ',' << (res.pass() ? "true" : "false") << ',' << num(res.seconds) << '\n';
                }
            }
            return all ? 0 : 1;
        }
    } catch (const dsqft::DomainError& e) {
        std::cerr << "dsqft: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "dsqft: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
