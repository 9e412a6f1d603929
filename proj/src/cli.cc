// Copyright 2026 The biasforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biasforge/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>

#include "biasforge/bounds.h"
#include "biasforge/distill.h"
#include "biasforge/errors.h"
#include "biasforge/gadget.h"
#include "biasforge/noise.h"

#ifndef BIASFORGE_VERSION
#define BIASFORGE_VERSION "0.0.0"
#endif

namespace biasforge::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char *kTool = "biasforge";

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Json num(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return format_double(x);
}

Json num(long double x) {
    return num(static_cast<double>(x));
}

std::string csv_cell(const Json &v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "1" : "0";
    }
    if (v.is_number_float()) {
        return format_double(v.get<double>());
    }
    if (v.is_number()) {
        return v.dump();
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

void flatten(const Json &obj, const std::string &prefix, std::vector<std::string> &keys, std::vector<Json> &values) {
    for (const auto &[k, v] : obj.items()) {
        std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, keys, values);
        } else {
            keys.push_back(key);
            values.push_back(v);
        }
    }
}

/// Everything a command produces, independent of the output format.
struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    uint64_t seed = 0;
    Json result = Json::object();
    // Tabular commands fill these instead of `result`.
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
    int exit_code = kExitOk;

    void set(const std::string &key, double value) {
        config.emplace_back(key, format_double(value));
    }
    void set(const std::string &key, int64_t value) {
        config.emplace_back(key, std::to_string(value));
    }
    void set(const std::string &key, const std::string &value) {
        config.emplace_back(key, value);
    }
};

std::string render_json(const Report &r) {
    Json doc;
    doc["tool"] = kTool;
    doc["version"] = BIASFORGE_VERSION;
    doc["command"] = r.command;
    doc["seed"] = r.seed;
    Json cfg = Json::object();
    for (const auto &[k, v] : r.config) {
        cfg[k] = v;
    }
    doc["config"] = cfg;
    if (!r.columns.empty()) {
        Json table;
        table["columns"] = r.columns;
        Json rows = Json::array();
        for (const auto &row : r.rows) {
            rows.push_back(row);
        }
        table["rows"] = rows;
        doc["result"] = table;
    } else {
        doc["result"] = r.result;
    }
    return doc.dump(2) + "\n";
}

std::string render_csv(const Report &r) {
    std::ostringstream out;
    out << "# tool: " << kTool << " " << BIASFORGE_VERSION << "\n";
    out << "# command: " << r.command << "\n";
    out << "# seed: " << r.seed << "\n";
    for (const auto &[k, v] : r.config) {
        out << "# config: " << k << "=" << v << "\n";
    }
    auto line = [&](const std::vector<std::string> &cells) {
        for (size_t i = 0; i < cells.size(); i++) {
            out << (i ? "," : "") << cells[i];
        }
        out << "\n";
    };
    if (!r.columns.empty()) {
        line(r.columns);
        for (const auto &row : r.rows) {
            std::vector<std::string> cells;
            for (const auto &v : row) {
                cells.push_back(csv_cell(v));
            }
            line(cells);
        }
    } else {
        std::vector<std::string> keys;
        std::vector<Json> values;
        flatten(r.result, "", keys, values);
        std::vector<std::string> cells;
        for (const auto &v : values) {
            cells.push_back(csv_cell(v));
        }
        line(keys);
        line(cells);
    }
    return out.str();
}

std::string render(const Report &r) {
    for (const auto &[k, v] : r.config) {
        if (k == "format" && v == "csv") {
            return render_csv(r);
        }
    }
    return render_json(r);
}

// Noise flags shared by bounds, simulate and plan.
struct NoiseFlags {
    double pz = 0;
    std::optional<double> px;
    std::optional<double> bias;
    std::optional<double> pzz;

    void add(CLI::App *app) {
        app->add_option("--pz", pz, "Z error probability per location")->required();
        auto *px_opt = app->add_option("--px", px, "X error probability per location");
        auto *bias_opt = app->add_option("--bias", bias, "Bias eta = pz/px (alternative to --px)");
        px_opt->excludes(bias_opt);
        app->add_option("--pzz", pzz, "Correlated ZZ probability per two-qubit gate (default: px)");
    }

    NoiseParams resolve() const {
        if (px.has_value() == bias.has_value()) {
            throw UsageError("give exactly one of --px and --bias");
        }
        NoiseParams np;
        np.p_z = pz;
        if (px) {
            np.p_x = *px;
        } else {
            if (!(*bias >= 1)) {
                throw UsageError("--bias must be at least 1");
            }
            np.p_x = std::isinf(*bias) ? 0 : pz / *bias;
        }
        np.p_zz = pzz.value_or(np.p_x);
        np.validate();
        return np;
    }

    static void record(Report &r, const NoiseParams &np) {
        r.set("pz", np.p_z);
        r.set("px", np.p_x);
        r.set("pzz", np.p_zz);
    }
};

void check_odd(int v, const char *flag) {
    if (v < 1 || v % 2 == 0) {
        throw UsageError(std::string(flag) + " must be an odd positive integer");
    }
}

Json noise_json(const NoiseParams &np) {
    Json j;
    j["p_z"] = num(np.p_z);
    j["p_x"] = num(np.p_x);
    j["p_zz"] = num(np.p_zz);
    j["eta"] = num(np.eta());
    return j;
}

Json channel_json(const Channel &c) {
    Json j;
    j["e_x"] = num(c.e_x);
    j["e_z"] = num(c.e_z);
    return j;
}

Json plan_json(const DistillPlan &p) {
    Json j;
    j["use_gadget"] = p.use_gadget;
    j["n"] = p.n;
    j["r"] = p.r;
    j["layers"] = p.layers;
    j["input"] = channel_json(p.input);
    j["achieved"] = channel_json(p.achieved);
    j["overhead"] = num(p.overhead);
    return j;
}

BaselineModel parse_baseline(const std::string &s) {
    if (s == "n1-gadget") {
        return BaselineModel::kUnencodedGadget;
    }
    if (s == "bare") {
        return BaselineModel::kBareChannel;
    }
    throw UsageError("unknown baseline '" + s + "'");
}

const std::vector<std::string> kFigures = {
    "bounds-r3", "bounds-r1", "rm-r3", "rm-r1", "overhead-8", "overhead-12", "overhead-16", "overhead-18"};

const char *kSweepColumns = R"(Columns by figure:
  bounds-r3, bounds-r1 (n=3, r=3 or 1):
    p_z,eta,p_x,p_zz,e_xl,e_zl,below_pz
  rm-r3, rm-r1 (gadget bound rates fed through --layers RM15 layers):
    p_z,eta,e_x_in,e_z_in,layers,e_x_out,e_z_out,p_accept,final_bias,status
  overhead-8, -12, -16, -18 (target 1e-8 ... 1e-18):
    p_z,eta,target,gadget_r,gadget_layers,gadget_overhead,baseline_r,baseline_layers,baseline_overhead,savings,advantaged,status
Numbers use the shortest decimal form that round-trips; lines starting with '#' carry the tool version, seed and resolved configuration.)";

// All flag values of one invocation.
struct Flags {
    std::string format;
    std::string out;
    std::string config;  // consumed before parsing; kept so --help lists it

    // bounds / simulate
    int n = 3;
    int r = 3;
    NoiseFlags noise;

    // simulate
    std::string theta = "T";
    std::optional<double> theta_radians;
    std::string mode;
    std::optional<int64_t> trials;
    std::optional<int> max_order;
    uint64_t seed = 1;
    double idle = 0;
    std::string guard = "conditional";

    // plan
    double target = 0;
    std::string baseline = "n1-gadget";
    int max_layers = 6;

    // sweep
    std::string figure;
    int points = 25;
    std::optional<double> pz_min;
    std::optional<double> pz_max;
    std::vector<double> etas = {10, 100, 1000};
    std::optional<double> sweep_pzz;
    double pzz_scale = 1;
    int layers = 1;

    // replay
    std::string in;
    bool check = false;
};

Report cmd_bounds(const Flags &f) {
    check_odd(f.n, "--n");
    check_odd(f.r, "--r");
    NoiseParams np = f.noise.resolve();
    Report rep;
    rep.command = "bounds";
    rep.set("n", int64_t{f.n});
    rep.set("r", int64_t{f.r});
    NoiseFlags::record(rep, np);
    rep.set("format", f.format);

    BoundBreakdown b = breakdown(BoundInputs{f.n, f.r, f.r, np});
    rep.result["noise"] = noise_json(np);
    rep.result["m"] = (f.r + 1) / 2;
    rep.result["eps_x3"] = num(b.eps_x3);
    rep.result["eps_x_mzz"] = num(b.eps_x_mzz);
    rep.result["eps_x2"] = num(b.eps_x2);
    rep.result["eps_x_mz"] = num(b.eps_x_mz);
    rep.result["eps_z1"] = num(b.eps_z1);
    rep.result["eps_z2"] = num(b.eps_z2);
    rep.result["breakdown_e_xl"] = num(b.e_xl);
    rep.result["breakdown_e_zl"] = num(b.e_zl);
    rep.result["e_xl"] = num(e_xl_bound(f.n, f.r, np.p_x, np.p_z));
    rep.result["e_zl"] = num(e_zl_bound(f.n, f.r, np.p_x, np.p_z, np.p_zz));
    return rep;
}

Report cmd_simulate(const Flags &f) {
    check_odd(f.n, "--n");
    check_odd(f.r, "--r");
    NoiseParams np = f.noise.resolve();
    np.idle_multiplier = f.idle;
    np.validate();

    GadgetConfig cfg;
    if (f.theta_radians) {
        cfg = GadgetConfig::make(Target::kCustom, f.n, f.r, *f.theta_radians);
    } else if (f.theta == "T") {
        cfg = GadgetConfig::make(Target::kT, f.n, f.r);
    } else if (f.theta == "plusI") {
        cfg = GadgetConfig::make(Target::kPlusI, f.n, f.r);
    } else {
        throw UsageError("--theta must be plusI or T");
    }
    cfg.validate();
    if (f.guard != "conditional" && f.guard != "joint") {
        throw UsageError("--guard must be conditional or joint");
    }

    Report rep;
    rep.command = "simulate";
    rep.set("n", int64_t{f.n});
    rep.set("r", int64_t{f.r});
    if (f.theta_radians) {
        rep.set("theta-radians", *f.theta_radians);
    } else {
        rep.set("theta", f.theta);
    }
    NoiseFlags::record(rep, np);
    rep.set("idle", np.idle_multiplier);
    rep.set("mode", f.mode);

    RateEstimate est;
    if (f.mode == "mc") {
        if (!f.trials || *f.trials < 1) {
            throw UsageError("--mode mc needs --trials >= 1");
        }
        rep.set("trials", *f.trials);
        rep.set("seed", static_cast<int64_t>(f.seed));
        rep.seed = f.seed;
        est = estimate_rates_mc(cfg, np, static_cast<uint64_t>(*f.trials), f.seed, threads_from_env());
    } else if (f.mode == "enumerate") {
        if (!f.max_order || *f.max_order < 1 || *f.max_order > 2) {
            throw UsageError("--mode enumerate needs --max-order 1 or 2");
        }
        rep.set("max-order", int64_t{*f.max_order});
        est = enumerate_faults(cfg, np, *f.max_order);
    } else {
        throw UsageError("--mode must be mc or enumerate");
    }
    rep.set("guard", f.guard);
    rep.set("format", f.format);

    const double bx = e_xl_bound(f.n, f.r, np.p_x, np.p_z);
    const double bz = e_zl_bound(f.n, f.r, np.p_x, np.p_z, np.p_zz);
    const bool mc = f.mode == "mc";
    Json &res = rep.result;
    res["noise"] = noise_json(np);
    res["theta"] = num(cfg.theta);
    res["e_x"] = num(est.e_x);
    res["e_z"] = num(est.e_z);
    res["e_y"] = num(est.e_y);
    res["reject_rate"] = num(est.reject_rate);
    res["joint_e_x"] = num(est.joint_e_x);
    res["joint_e_z"] = num(est.joint_e_z);
    res["joint_e_y"] = num(est.joint_e_y);
    res["anomalous_rate"] = num(est.anomalous_rate);
    res["wrong_angle_rate"] = num(est.wrong_angle_rate);
    if (mc) {
        res["trials"] = est.trials_or_order;
        res["accepted"] = est.accepted;
        res["ci95_x"] = num(est.ci95_x);
        res["ci95_z"] = num(est.ci95_z);
        res["ci95_y"] = num(est.ci95_y);
        res["ci95_halfwidth"] = num(est.ci95_halfwidth);
    } else {
        res["max_order"] = est.trials_or_order;
        res["total_probability_weight"] = num(est.total_probability_weight);
    }
    res["e_xl_bound"] = num(bx);
    res["e_zl_bound"] = num(bz);

    double gx = est.e_x;
    double gz = est.e_z;
    double cx = mc ? est.ci95_x : 0;
    double cz = mc ? est.ci95_z : 0;
    if (f.guard == "joint") {
        gx = est.joint_e_x;
        gz = est.joint_e_z;
        const double n_trials = static_cast<double>(est.trials_or_order);
        cx = mc ? 1.96 * std::sqrt(gx * (1 - gx) / n_trials) : 0;
        cz = mc ? 1.96 * std::sqrt(gz * (1 - gz) / n_trials) : 0;
    }
    const bool x_ok = gx <= bx + 3 * cx;
    const bool z_ok = gz <= bz + 3 * cz;
    res["x_within_bound"] = x_ok;
    res["z_within_bound"] = z_ok;
    if (!x_ok || !z_ok) {
        rep.exit_code = kExitBoundViolation;
    }
    return rep;
}

Report cmd_plan(const Flags &f) {
    if (!(f.target > 0 && f.target < 1)) {
        throw UsageError("--target must lie in (0, 1)");
    }
    if (f.max_layers < 0) {
        throw UsageError("--max-layers must be non-negative");
    }
    NoiseParams np = f.noise.resolve();
    PlanOptions opt;
    opt.baseline = parse_baseline(f.baseline);
    opt.max_layers = f.max_layers;

    Report rep;
    rep.command = "plan";
    rep.set("target", f.target);
    NoiseFlags::record(rep, np);
    rep.set("baseline", f.baseline);
    rep.set("max-layers", int64_t{f.max_layers});
    rep.set("format", f.format);

    PlanResult p = plan(f.target, np, opt);
    rep.result["noise"] = noise_json(np);
    rep.result["gadget"] = plan_json(p.gadget);
    rep.result["baseline"] = plan_json(p.baseline);
    rep.result["savings"] = num(p.savings());
    return rep;
}

Report cmd_sweep(const Flags &f) {
    if (std::find(kFigures.begin(), kFigures.end(), f.figure) == kFigures.end()) {
        throw UsageError("unknown figure '" + f.figure + "'");
    }
    if (f.points < 1) {
        throw UsageError("--points must be positive");
    }
    if (f.etas.empty()) {
        throw UsageError("--etas must not be empty");
    }
    for (double eta : f.etas) {
        if (!(eta >= 1)) {
            throw UsageError("every bias in --etas must be at least 1");
        }
    }
    const bool is_bounds = f.figure.rfind("bounds", 0) == 0;
    const bool is_rm = f.figure.rfind("rm", 0) == 0;
    const double pz_min = f.pz_min.value_or(is_rm ? 1e-4 : 1e-5);
    const double pz_max = f.pz_max.value_or(1e-2);
    if (!(pz_min > 0 && pz_max >= pz_min && pz_max <= 1)) {
        throw UsageError("need 0 < --pz-min <= --pz-max <= 1");
    }
    if (f.points == 1 && pz_min != pz_max) {
        throw UsageError("a single point needs --pz-min equal to --pz-max");
    }
    PzzRule rule;
    if (f.sweep_pzz) {
        rule = {PzzRule::Kind::kFixed, *f.sweep_pzz};
    } else if (f.pzz_scale != 1) {
        rule = {PzzRule::Kind::kScaled, f.pzz_scale};
    }

    Report rep;
    rep.command = "sweep";
    rep.set("figure", f.figure);
    rep.set("points", int64_t{f.points});
    rep.set("pz-min", pz_min);
    rep.set("pz-max", pz_max);
    std::string etas;
    for (double e : f.etas) {
        etas += (etas.empty() ? "" : ",") + format_double(e);
    }
    rep.set("etas", etas);
    if (f.sweep_pzz) {
        rep.set("pzz", *f.sweep_pzz);
    } else {
        rep.set("pzz-scale", f.pzz_scale);
    }

    const auto grid = log_space(pz_min, pz_max, f.points);
    auto noise_at = [&](double p_z, double eta) {
        NoiseParams np;
        np.p_z = p_z;
        np.p_x = std::isinf(eta) ? 0 : p_z / eta;
        np.p_zz = rule.apply(np.p_x);
        return np;
    };

    if (is_bounds) {
        const int r = f.figure == "bounds-r3" ? 3 : 1;
        rep.columns = {"p_z", "eta", "p_x", "p_zz", "e_xl", "e_zl", "below_pz"};
        for (double eta : f.etas) {
            for (double p_z : grid) {
                NoiseParams np = noise_at(p_z, eta);
                double ex = e_xl_bound(3, r, np.p_x, np.p_z);
                double ez = e_zl_bound(3, r, np.p_x, np.p_z, np.p_zz);
                rep.rows.push_back({num(p_z), num(eta), num(np.p_x), num(np.p_zz), num(ex), num(ez), ex < p_z && ez < p_z});
            }
        }
    } else if (is_rm) {
        if (f.layers < 0 || f.layers > 6) {
            throw UsageError("--layers must lie in [0, 6]");
        }
        rep.set("layers", int64_t{f.layers});
        const int r = f.figure == "rm-r3" ? 3 : 1;
        rep.columns = {"p_z", "eta", "e_x_in", "e_z_in", "layers", "e_x_out", "e_z_out", "p_accept", "final_bias", "status"};
        for (double eta : f.etas) {
            for (double p_z : grid) {
                NoiseParams np = noise_at(p_z, eta);
                Channel in{e_xl_bound(3, r, np.p_x, np.p_z), e_zl_bound(3, r, np.p_x, np.p_z, np.p_zz)};
                std::vector<Json> row = {num(p_z), num(eta), num(in.e_x), num(in.e_z), f.layers};
                if (!(in.e_x < 0.5L && in.e_z < 0.5L)) {
                    row.insert(row.end(), {nullptr, nullptr, nullptr, nullptr, "invalid-input"});
                } else {
                    try {
                        Channel c = in;
                        long double p_accept = 1;
                        for (int l = 0; l < f.layers; l++) {
                            DetectionResult d = rm15_map(c);
                            c = d.out;
                            p_accept = d.p_accept;
                            if (!(c.e_x < 0.5L && c.e_z < 0.5L)) {
                                throw SaturationError("saturated", l + 1);
                            }
                        }
                        row.insert(row.end(), {num(c.e_x), num(c.e_z), num(p_accept), num(final_bias(c)), "ok"});
                    } catch (const SaturationError &) {
                        row.insert(row.end(), {nullptr, nullptr, nullptr, nullptr, "saturated"});
                    }
                }
                rep.rows.push_back(row);
            }
        }
    } else {
        const int exponent = std::stoi(f.figure.substr(f.figure.find('-') + 1));
        const double target = std::pow(10.0, -exponent);
        rep.set("baseline", f.baseline);
        PlanOptions opt;
        opt.baseline = parse_baseline(f.baseline);
        rep.columns = {"p_z", "eta", "target", "gadget_r", "gadget_layers", "gadget_overhead", "baseline_r",
                       "baseline_layers", "baseline_overhead", "savings", "advantaged", "status"};
        for (double eta : f.etas) {
            for (double p_z : grid) {
                NoiseParams np = noise_at(p_z, eta);
                std::vector<Json> row = {num(p_z), num(eta), num(target)};
                try {
                    PlanResult p = plan(target, np, opt);
                    row.insert(row.end(), {p.gadget.r, p.gadget.layers, num(p.gadget.overhead), p.baseline.r,
                                           p.baseline.layers, num(p.baseline.overhead), num(p.savings()),
                                           p.gadget.overhead < p.baseline.overhead, "ok"});
                } catch (const FeasibilityError &) {
                    row.insert(row.end(), {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, "infeasible"});
                }
                rep.rows.push_back(row);
            }
        }
    }
    rep.set("format", f.format);
    return rep;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Command and flag list recorded in a report header.
std::vector<std::string> replay_args(const std::string &text) {
    std::vector<std::string> args;
    if (!text.empty() && text[0] == '{') {
        Json doc = Json::parse(text);
        args.push_back(doc.at("command").get<std::string>());
        for (const auto &[k, v] : doc.at("config").items()) {
            args.push_back("--" + k);
            args.push_back(v.get<std::string>());
        }
        return args;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line) && line.rfind("#", 0) == 0) {
        if (line.rfind("# command: ", 0) == 0) {
            args.insert(args.begin(), line.substr(11));
        } else if (line.rfind("# config: ", 0) == 0) {
            std::string kv = line.substr(10);
            size_t eq = kv.find('=');
            args.push_back("--" + kv.substr(0, eq));
            args.push_back(kv.substr(eq + 1));
        }
    }
    if (args.empty() || args[0].rfind("--", 0) == 0) {
        throw UsageError("no command header found");
    }
    return args;
}

void write_output(const std::string &text, const std::string &path, std::ostream &out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw UsageError("cannot write " + path);
    }
    f << text;
}

// Appends "--key value" for every key=value line of `path` whose flag is not
// already on the command line, and drops the --config flag itself.
std::vector<std::string> merge_config(const std::vector<std::string> &args, const std::string &path) {
    std::vector<std::string> merged;
    for (size_t i = 0; i < args.size(); i++) {
        if (args[i] == "--config") {
            i++;
        } else if (args[i].rfind("--config=", 0) == 0) {
            continue;
        } else {
            merged.push_back(args[i]);
        }
    }
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        auto trim = [](std::string s) {
            const char *ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            s.erase(s.find_last_not_of(ws) + 1);
            return s;
        };
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line '" + line + "' is not key=value");
        }
        std::string flag = "--" + trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        bool given = std::any_of(merged.begin(), merged.end(), [&](const std::string &a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (flag == "--config") {
            throw UsageError("config files cannot include other config files");
        }
        if (!given) {
            merged.push_back(flag);
            merged.push_back(value);
        }
    }
    return merged;
}

struct Parsed {
    std::string command;
    Flags flags;
};

int execute(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, int depth);

int dispatch(const Parsed &p, std::ostream &out, std::ostream &err, int depth) {
    const Flags &f = p.flags;
    if (p.command == "replay") {
        if (depth > 0) {
            throw UsageError("a replayed header cannot name replay");
        }
        const std::string original = read_file(f.in);
        std::vector<std::string> args = replay_args(original);
        std::ostringstream regenerated;
        int code = execute(args, regenerated, err, depth + 1);
        if (f.check) {
            if (regenerated.str() != original) {
                err << "replay output differs from " << f.in << "\n";
                return kExitFailure;
            }
            return code;
        }
        write_output(regenerated.str(), f.out, out);
        return code;
    }
    Report rep;
    if (p.command == "bounds") {
        rep = cmd_bounds(f);
    } else if (p.command == "simulate") {
        rep = cmd_simulate(f);
    } else if (p.command == "plan") {
        rep = cmd_plan(f);
    } else if (p.command == "sweep") {
        rep = cmd_sweep(f);
    } else {
        throw UsageError("no command given");
    }
    write_output(render(rep), f.out, out);
    return rep.exit_code;
}

int execute(const std::vector<std::string> &raw_args, std::ostream &out, std::ostream &err, int depth) {
    std::vector<std::string> args = raw_args;
    for (size_t i = 0; i < raw_args.size(); i++) {
        if (raw_args[i] == "--config" && i + 1 < raw_args.size()) {
            args = merge_config(raw_args, raw_args[i + 1]);
        } else if (raw_args[i].rfind("--config=", 0) == 0) {
            args = merge_config(raw_args, raw_args[i].substr(9));
        }
    }
    Parsed p;
    Flags &f = p.flags;
    CLI::App app{"Noise-bias-preserving magic state preparation: bounds, simulation and distillation planning"};
    app.set_version_flag("--version", std::string(kTool) + " " + BIASFORGE_VERSION);
    app.require_subcommand(1);

    auto add_format = [&](CLI::App *sub) {
        sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", f.out, "Write the report to this file instead of stdout");
        sub->add_option("--config", f.config, "Read flags from a key=value file (command-line flags take precedence)");
    };
    auto add_code = [&](CLI::App *sub) {
        sub->add_option("--n", f.n, "Repetition code length (odd)");
        sub->add_option("--r", f.r, "Measurement repetitions r_z = r_zz (odd)");
    };

    auto *bounds = app.add_subcommand("bounds", "Evaluate the logical error bounds and their breakdown");
    add_code(bounds);
    f.noise.add(bounds);
    add_format(bounds);

    auto *simulate = app.add_subcommand("simulate", "Estimate logical error rates by Monte Carlo or fault enumeration");
    add_code(simulate);
    f.noise.add(simulate);
    simulate->add_option("--theta", f.theta, "Target state: plusI or T")->check(CLI::IsMember({"plusI", "T"}));
    simulate->add_option("--theta-radians", f.theta_radians, "Custom rotation angle in radians");
    simulate->add_option("--mode", f.mode, "mc or enumerate")->required()->check(CLI::IsMember({"mc", "enumerate"}));
    simulate->add_option("--trials", f.trials, "Monte Carlo trials");
    simulate->add_option("--max-order", f.max_order, "Enumeration order (1 or 2)");
    simulate->add_option("--seed", f.seed, "Monte Carlo seed");
    simulate->add_option("--idle", f.idle, "Idle noise per step as a multiple of pz and px (default 0)");
    simulate->add_option("--guard", f.guard, "Rates compared with the bounds: conditional or joint");
    add_format(simulate);

    auto *plan_cmd = app.add_subcommand("plan", "Choose RM15 layer counts with and without the gadget");
    plan_cmd->add_option("--target", f.target, "Target logical error rate")->required();
    f.noise.add(plan_cmd);
    plan_cmd->add_option("--baseline", f.baseline, "Reference preparation: n1-gadget or bare");
    plan_cmd->add_option("--max-layers", f.max_layers, "Layer cap");
    add_format(plan_cmd);

    auto *sweep = app.add_subcommand("sweep", "Write a figure dataset");
    sweep->add_option("--figure", f.figure, "Dataset key: bounds-r3, bounds-r1, rm-r3, rm-r1, overhead-8, overhead-12, overhead-16, overhead-18")
        ->required();
    sweep->add_option("--points", f.points, "Log-spaced p_z points");
    sweep->add_option("--pz-min", f.pz_min, "Smallest p_z");
    sweep->add_option("--pz-max", f.pz_max, "Largest p_z");
    sweep->add_option("--etas", f.etas, "Comma-separated bias values")->delimiter(',');
    auto *pzz_opt = sweep->add_option("--pzz", f.sweep_pzz, "Fixed p_zz (default: p_zz = pzz-scale * p_x)");
    sweep->add_option("--pzz-scale", f.pzz_scale, "p_zz as a multiple of p_x")->excludes(pzz_opt);
    sweep->add_option("--layers", f.layers, "RM15 layers for the rm-* datasets");
    sweep->add_option("--baseline", f.baseline, "Reference preparation for overhead-*: n1-gadget or bare");
    add_format(sweep);
    sweep->footer(kSweepColumns);

    auto *replay = app.add_subcommand("replay", "Re-run the invocation recorded in a report header");
    replay->add_option("--in", f.in, "Report file")->required();
    replay->add_option("--out", f.out, "Write the regenerated report here instead of stdout");
    replay->add_flag("--check", f.check, "Exit 1 unless the regenerated report is byte-identical to --in");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    for (auto *sub : app.get_subcommands()) {
        p.command = sub->get_name();
    }
    if (f.format.empty()) {
        f.format = p.command == "sweep" ? "csv" : "json";
    }
    return dispatch(p, out, err, depth);
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

unsigned threads_from_env() {
    const char *v = std::getenv("BIASFORGE_THREADS");
    if (v == nullptr || *v == '\0') {
        return 0;
    }
    unsigned t = 0;
    auto res = std::from_chars(v, v + std::strlen(v), t);
    if (res.ec != std::errc() || *res.ptr != '\0') {
        throw UsageError("BIASFORGE_THREADS must be a non-negative integer");
    }
    return t;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    try {
        return execute(args, out, err, 0);
    } catch (const FeasibilityError &e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace biasforge::cli
