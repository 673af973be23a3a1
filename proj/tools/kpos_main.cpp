// Command-line front end: parse system files, run k-positivity analyses, and
// export plot data.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpos/json_io.hpp"
#include "kpos/kpos.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;     // parse or usage errors
constexpr int kExitNegative = 2;  // analysis completed with a negative verdict

using nlohmann::json;

std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        values.push_back(std::stod(item, &pos));
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
        if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    }
    if (values.empty()) throw std::invalid_argument("empty list");
    return values;
}

void write_csv(const std::string& path, const kpos::Signal& signal) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open CSV output: " + path);
    out << "t,value\n";
    for (std::size_t i = 0; i < signal.values.size(); ++i)
        out << format_full(signal.grid[i]) << "," << format_full(signal.values[i]) << "\n";
}

json conditions_to_json(const std::vector<kpos::Condition>& conditions) {
    json arr = json::array();
    for (const auto& c : conditions) {
        json item;
        item["name"] = c.name;
        item["pass"] = c.pass;
        if (!c.witness.empty()) item["witness"] = c.witness;
        arr.push_back(std::move(item));
    }
    return arr;
}

json tolerances_to_json(const kpos::ToleranceConfig& tol) {
    return json{{"minor_tol", tol.minor_tol},
                {"rank_tol_rel", tol.rank_tol_rel},
                {"zero_clamp", tol.zero_clamp}};
}

void print_conditions(const std::vector<kpos::Condition>& conditions) {
    for (const auto& c : conditions) {
        std::cout << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
        if (!c.witness.empty()) std::cout << "  (" << c.witness << ")";
        std::cout << "\n";
    }
}

kpos::StateSpace load_checked(const std::string& path) {
    kpos::StateSpace sys = kpos::load_system(path);
    if (sys.is_discrete() && !kpos::is_stable(sys))
        std::cerr << "warning: system is not Schur stable; finite-horizon results remain valid\n";
    return sys;
}

int cmd_analyze(const std::string& path, int k_opt, int horizon, bool as_json,
                const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(path);
    const int n = sys.order();
    const int k = k_opt > 0 ? k_opt : n;
    if (k > n) {
        std::cerr << "error: requested order " << k << " exceeds system order " << n << "\n";
        return kExitUsage;
    }

    const auto pole = kpos::pole_diagnostics(sys, k);
    const auto external = kpos::external_hankel_k_positivity(sys, k, horizon, tol);
    const auto internal = sys.is_discrete() ? kpos::internal_hankel_k_positivity(sys, k, tol)
                                            : kpos::ct_internal_hankel_k_positivity(sys, k, tol);

    if (as_json) {
        json doc;
        doc["verdict"] = {
            {"time", sys.is_discrete() ? "discrete" : "continuous"},
            {"requested_order", k},
            {"internal_order", internal.order_certified},
            {"internal_certified", internal.certified()},
            {"external_order", external.order_certified},
            {"external_horizon", external.horizon},
            {"pole_diagnostics_pass", pole.pass},
        };
        json conds = conditions_to_json(internal.conditions);
        for (auto& c : conditions_to_json(external.conditions)) conds.push_back(c);
        doc["conditions"] = std::move(conds);
        doc["tolerances"] = tolerances_to_json(tol);
        doc["tool_version"] = kpos::kVersion;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "system: " << path << " (order " << n << ", "
                  << (sys.is_discrete() ? "discrete" : "continuous") << ")\n";
        std::cout << "pole diagnostics (necessary conditions at k=" << k
                  << "): " << (pole.pass ? "pass" : "fail");
        if (!pole.pass) std::cout << " -- " << pole.detail;
        std::cout << "\npoles:";
        for (const auto& p : pole.poles) {
            std::cout << " " << p.real();
            if (std::abs(p.imag()) > 0) std::cout << (p.imag() > 0 ? "+" : "") << p.imag() << "i";
        }
        std::cout << "\n\ninternal certification (requested k=" << k << "):\n";
        print_conditions(internal.conditions);
        std::cout << "internal order: " << internal.order_certified << "\n";
        std::cout << "\nexternal certification (horizon " << external.horizon
                  << ", certified up to horizon only):\n";
        print_conditions(external.conditions);
        std::cout << "external order: " << external.order_certified << "\n";
    }
    return internal.certified() ? kExitOk : kExitNegative;
}

int cmd_impulse(const std::string& path, int horizon, int j, const std::string& csv,
                double step, const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(path);
    if (j < 1 || j > sys.order()) {
        std::cerr << "error: --j must be in [1, " << sys.order() << "]\n";
        return kExitUsage;
    }
    kpos::Signal signal;
    if (j == 1)
        signal = sys.is_discrete() ? kpos::impulse_response(sys, horizon)
                                   : kpos::impulse_response(sys, step, horizon);
    else
        signal = kpos::compound_impulse(sys, j, horizon);
    if (!csv.empty()) write_csv(csv, signal);

    int changes = 0;
    std::vector<std::pair<double, double>> crossings;
    double last = 0, last_t = 0;
    for (std::size_t i = 0; i < signal.values.size(); ++i) {
        const double x = signal.values[i];
        if (std::abs(x) <= tol.zero_clamp) continue;
        if (last != 0 && last * x < 0) {
            ++changes;
            crossings.emplace_back(last_t, signal.grid[i]);
        }
        last = x;
        last_t = signal.grid[i];
    }
    std::cout << "samples: " << signal.values.size() << "\n";
    std::cout << "sign changes: " << changes << "\n";
    for (const auto& [a, b] : crossings)
        std::cout << "  crossing between t=" << a << " and t=" << b << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& path, const std::string& x0_text, int horizon,
                 const std::string& csv, double step, const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(path);
    const auto x0_values = parse_double_list(x0_text);
    if (static_cast<int>(x0_values.size()) != sys.order()) {
        std::cerr << "error: --x0 must have length " << sys.order() << "\n";
        return kExitUsage;
    }
    kpos::Vector x0(sys.order());
    for (int i = 0; i < sys.order(); ++i) x0(i) = x0_values[static_cast<std::size_t>(i)];
    const kpos::Signal y = sys.is_discrete() ? kpos::simulate_autonomous(sys, x0, horizon)
                                             : kpos::simulate_autonomous(sys, x0, step, horizon);
    if (!csv.empty()) write_csv(csv, y);
    std::cout << "var(x0) = " << kpos::variation(x0, tol) << "\n";
    std::cout << "var(y) = " << kpos::variation(y, tol) << "\n";
    return kExitOk;
}

int cmd_step_bound(const std::string& path, int k_opt, const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(path);
    const int k = k_opt > 0 ? k_opt : sys.order();
    if (k > sys.order()) {
        std::cerr << "error: requested order exceeds system order\n";
        return kExitUsage;
    }
    const auto result = kpos::overshoot_upper_bound(sys, k, tol);
    print_conditions(result.conditions);
    if (result.bound) {
        std::cout << "bound: " << *result.bound
                  << " (= var(b); observability operator certified variation-diminishing at order "
                  << result.certified_order - 1 << ")";
        if (!result.eta_ladder.empty()) {
            std::cout << " [shifted ladder eta =";
            for (double eta : result.eta_ladder) std::cout << " " << eta;
            std::cout << "]";
        }
        std::cout << "\n";
        return kExitOk;
    }
    std::cout << "no certificate: see failed conditions above (var(b) = " << result.var_b
              << ")\n";
    return kExitNegative;
}

int cmd_verify_transform(const std::string& sys_path, const std::string& plus_path,
                         const std::string& p_path, int k_opt,
                         const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(sys_path);
    const kpos::StateSpace sys_plus = load_checked(plus_path);
    const kpos::Matrix P = kpos::load_matrix(p_path);
    const int k = k_opt > 0 ? k_opt : sys.order();
    const auto verdict = kpos::verify_realization_transform(sys, sys_plus, P, k, tol);
    print_conditions(verdict.conditions);
    std::cout << (verdict.pass ? "transform verified" : "transform rejected") << " at k=" << k
              << "\n";
    return verdict.pass ? kExitOk : kExitNegative;
}

int cmd_construct_tp(const std::string& poles_text, const std::string& residues_text) {
    const auto poles = parse_double_list(poles_text);
    const auto residues = parse_double_list(residues_text);
    const kpos::StateSpace sys =
        kpos::tp_realization(kpos::PartialFractions{poles, residues});
    std::cout << kpos::to_json(sys).dump(2) << "\n";
    return kExitOk;
}

int cmd_construct_b(const std::string& path, int k, const kpos::ToleranceConfig& tol) {
    const kpos::StateSpace sys = load_checked(path);
    const auto result = kpos::construct_b(sys.A, k, tol);
    json doc;
    doc["b"] = std::vector<double>(result.b.data(), result.b.data() + result.b.size());
    doc["alpha"] = result.alphas;
    doc["doublings"] = result.doublings;
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certification of variation-diminishing (Hankel k-positivity) properties "
                 "of LTI state-space systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kpos::kVersion);

    kpos::ToleranceConfig tol;
    app.add_option("--tol-minor", tol.minor_tol, "minor sign tolerance (base)")
        ->capture_default_str();
    app.add_option("--tol-rank", tol.rank_tol_rel, "relative rank pivot threshold")
        ->capture_default_str();
    app.add_option("--zero-clamp", tol.zero_clamp, "signal zero clamp")->capture_default_str();

    std::string path, plus_path, p_path, csv, x0_text, poles_text, residues_text;
    int k = -1, horizon = 50, j = 1;
    double step = 1.0;
    bool as_json = false;

    auto* analyze = app.add_subcommand("analyze", "pole, external and internal certification");
    analyze->add_option("path", path, "system JSON file")->required();
    analyze->add_option("--k", k, "requested positivity order (default: system order)");
    analyze->add_option("--horizon", horizon, "external-check horizon")->capture_default_str();
    analyze->add_flag("--json", as_json, "emit the verdict as JSON");

    auto* impulse = app.add_subcommand("impulse", "impulse response (or compound impulse) CSV");
    impulse->add_option("path", path)->required();
    impulse->add_option("--horizon", horizon)->capture_default_str();
    impulse->add_option("--j", j, "compound order (1 = plain impulse response)")
        ->capture_default_str();
    impulse->add_option("--csv", csv, "CSV output path");
    impulse->add_option("--step", step, "sample spacing for CT systems")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "autonomous output from an initial state");
    simulate->add_option("path", path)->required();
    simulate->add_option("--x0", x0_text, "comma-separated initial state")->required();
    simulate->add_option("--horizon", horizon)->capture_default_str();
    simulate->add_option("--csv", csv, "CSV output path");
    simulate->add_option("--step", step, "sample spacing for CT systems")->capture_default_str();

    auto* step_bound = app.add_subcommand("step-bound", "certified bound on step-response "
                                                        "over- and undershoots");
    step_bound->add_option("path", path)->required();
    step_bound->add_option("--k", k, "certification order (default: system order)");

    auto* verify = app.add_subcommand("verify-transform", "verify a realization transform");
    verify->add_option("path_sys", path)->required();
    verify->add_option("path_sys_plus", plus_path)->required();
    verify->add_option("path_P", p_path, "JSON 2-D array")->required();
    verify->add_option("--k", k, "order (default: system order)");

    auto* construct = app.add_subcommand("construct", "constructive realizations");
    construct->require_subcommand(1);
    auto* tp = construct->add_subcommand("tp-realization",
                                         "diagonal totally positive realization from "
                                         "simple partial fractions");
    tp->add_option("--poles", poles_text, "comma-separated poles")->required();
    tp->add_option("--residues", residues_text, "comma-separated residues")->required();
    auto* cb = construct->add_subcommand("construct-b",
                                         "input vector making the controllability compounds "
                                         "strictly positive");
    cb->add_option("--system", path, "system JSON file (A is used)")->required();
    cb->add_option("--k", k, "positivity order")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*analyze) return cmd_analyze(path, k, horizon, as_json, tol);
        if (*impulse) return cmd_impulse(path, horizon, j, csv, step, tol);
        if (*simulate) return cmd_simulate(path, x0_text, horizon, csv, step, tol);
        if (*step_bound) return cmd_step_bound(path, k, tol);
        if (*verify) return cmd_verify_transform(path, plus_path, p_path, k, tol);
        if (*tp) return cmd_construct_tp(poles_text, residues_text);
        if (*cb) return cmd_construct_b(path, k, tol);
    } catch (const kpos::PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return kExitNegative;
    } catch (const kpos::CapacityError& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
