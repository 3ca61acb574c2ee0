// Command-line front end: make-targets, detect, evaluate, similarity, synth,
// sweep. Every run writes a <prefix>_manifest.json recording the resolved
// configuration, input digests and stage counts, so any run can be
// reconstructed from its manifest.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxsyn/voxsyn.hpp"

namespace {

using nlohmann::ordered_json;
namespace vx = voxsyn;

ordered_json file_entry(const std::string& path) {
    ordered_json e;
    e["path"] = path;
    e["fnv1a64"] = vx::digest_file(path);
    return e;
}

struct Manifest {
    ordered_json j;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Manifest(const std::string& subcommand, int threads) {
        j["tool"] = "voxsyn";
        j["version"] = vx::kToolVersion;
        j["subcommand"] = subcommand;
        j["threads"] = threads;
        j["inputs"] = ordered_json::object();
    }
    void input(const std::string& role, const std::string& path) {
        j["inputs"][role] = file_entry(path);
    }
    // Volumes live in two files; digest both so payload changes are caught.
    void input_volume(const std::string& role, const std::string& header_path) {
        j["inputs"][role] = file_entry(header_path);
        j["inputs"][role + "_raw"] = file_entry(vx::detail::raw_path_for(header_path).string());
    }
    void output(const std::string& role, const std::string& path) {
        if (!j.contains("outputs")) j["outputs"] = ordered_json::object();
        j["outputs"][role] = file_entry(path);
    }
    void write(const std::string& path) {
        const auto dt = std::chrono::steady_clock::now() - t0;
        j["timings_ms"]["total"] =
            std::chrono::duration<double, std::milli>(dt).count();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw vx::format_error("cannot write manifest: " + path);
        out << j.dump(2) << "\n";
    }
};

// ---------------------------------------------------------------------------
// config parsing helpers (strict: unknown keys are rejected by path)
// ---------------------------------------------------------------------------

void check_keys(const nlohmann::json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw vx::validation_error("config: \"" + path + "\" must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw vx::validation_error("config: unknown field \"" +
                                       (path.empty() ? it.key() : path + "." + it.key()) +
                                       "\"");
    }
}

double get_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number())
        throw vx::validation_error("config: field \"" + path + "\" must be a number");
    return j.get<double>();
}

std::string get_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string())
        throw vx::validation_error("config: field \"" + path + "\" must be a string");
    return j.get<std::string>();
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vx::format_error("cannot open config: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw vx::format_error("invalid JSON in " + path + ": " + e.what());
    }
}

vx::DetectionConfig detection_config_from_json(const nlohmann::json& j) {
    vx::DetectionConfig cfg;
    check_keys(j, "", {"threshold", "peaks", "filter", "pairing"});
    if (j.contains("threshold")) {
        const auto& t = j["threshold"];
        check_keys(t, "threshold", {"mode", "tau", "rho"});
        if (t.contains("mode"))
            cfg.threshold.mode =
                vx::threshold_mode_from_string(get_string(t["mode"], "threshold.mode"));
        if (t.contains("tau")) cfg.threshold.tau_abs = get_number(t["tau"], "threshold.tau");
        if (t.contains("rho")) cfg.threshold.rho = get_number(t["rho"], "threshold.rho");
    }
    if (j.contains("peaks")) {
        const auto& p = j["peaks"];
        check_keys(p, "peaks",
                   {"method", "min_distance_voxels", "threshold_abs", "sigma_min",
                    "sigma_max", "num_sigma", "blob_threshold"});
        if (p.contains("method"))
            cfg.peak_method =
                vx::peak_method_from_string(get_string(p["method"], "peaks.method"));
        if (p.contains("min_distance_voxels"))
            cfg.peak.min_distance = get_number(p["min_distance_voxels"],
                                               "peaks.min_distance_voxels");
        if (p.contains("threshold_abs"))
            cfg.peak.threshold_abs = static_cast<float>(
                get_number(p["threshold_abs"], "peaks.threshold_abs"));
        if (p.contains("sigma_min"))
            cfg.blob.sigma_min = get_number(p["sigma_min"], "peaks.sigma_min");
        if (p.contains("sigma_max"))
            cfg.blob.sigma_max = get_number(p["sigma_max"], "peaks.sigma_max");
        if (p.contains("num_sigma"))
            cfg.blob.num_sigma = static_cast<int>(
                std::llround(get_number(p["num_sigma"], "peaks.num_sigma")));
        if (p.contains("blob_threshold"))
            cfg.blob.blob_threshold = static_cast<float>(
                get_number(p["blob_threshold"], "peaks.blob_threshold"));
    }
    if (j.contains("filter")) {
        const auto& f = j["filter"];
        check_keys(f, "filter", {"mode", "d_min_voxels"});
        if (f.contains("mode"))
            cfg.filter.mode = vx::filter_mode_from_string(get_string(f["mode"], "filter.mode"));
        if (f.contains("d_min_voxels"))
            cfg.filter.d_min = get_number(f["d_min_voxels"], "filter.d_min_voxels");
    }
    if (j.contains("pairing")) {
        const auto& p = j["pairing"];
        check_keys(p, "pairing", {"max_distance_voxels"});
        if (p.contains("max_distance_voxels"))
            cfg.pairing_max_distance =
                get_number(p["max_distance_voxels"], "pairing.max_distance_voxels");
    }
    return cfg;
}

ordered_json detection_config_to_json(const vx::DetectionConfig& cfg) {
    ordered_json j;
    j["threshold"] = {{"mode", vx::to_string(cfg.threshold.mode)},
                      {"tau", cfg.threshold.tau_abs},
                      {"rho", cfg.threshold.rho}};
    if (cfg.peak_method == vx::PeakMethod::peak_local_max) {
        j["peaks"] = {{"method", "peak_local_max"},
                      {"min_distance_voxels", cfg.peak.min_distance},
                      {"threshold_abs", cfg.peak.threshold_abs}};
    } else {
        j["peaks"] = {{"method", "blob_log"},
                      {"sigma_min", cfg.blob.sigma_min},
                      {"sigma_max", cfg.blob.sigma_max},
                      {"num_sigma", cfg.blob.num_sigma},
                      {"blob_threshold", cfg.blob.blob_threshold}};
    }
    j["filter"] = {{"mode", vx::to_string(cfg.filter.mode)},
                   {"d_min_voxels", cfg.filter.d_min}};
    j["pairing"] = {{"max_distance_voxels", cfg.pairing_max_distance}};
    return j;
}

vx::SynthConfig synth_config_from_json(const nlohmann::json& j) {
    vx::SynthConfig cfg;
    check_keys(j, "",
               {"shape", "n_synapses", "fanout", "pre_post_distance_range_voxels",
                "blob_sigma_voxels", "noise_std", "clutter_density", "seed",
                "min_site_separation_voxels", "nearest_margin_voxels",
                "border_margin_voxels", "render", "sphere_radius_voxels"});
    if (j.contains("shape")) {
        if (!j["shape"].is_array() || j["shape"].size() != 3)
            throw vx::validation_error("config: field \"shape\" must be [z,y,x]");
        for (int a = 0; a < 3; ++a)
            cfg.shape[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(
                std::llround(get_number(j["shape"].at(a), "shape")));
    }
    if (j.contains("n_synapses"))
        cfg.n_synapses =
            static_cast<int>(std::llround(get_number(j["n_synapses"], "n_synapses")));
    if (j.contains("fanout")) {
        if (!j["fanout"].is_object())
            throw vx::validation_error("config: field \"fanout\" must be an object");
        cfg.fanout.clear();
        for (auto it = j["fanout"].begin(); it != j["fanout"].end(); ++it) {
            int key = 0;
            try {
                key = std::stoi(it.key());
            } catch (...) {
                throw vx::validation_error("config: fanout keys must be integers 1..5");
            }
            cfg.fanout[key] = get_number(it.value(), "fanout." + it.key());
        }
    }
    if (j.contains("pre_post_distance_range_voxels")) {
        const auto& r = j["pre_post_distance_range_voxels"];
        if (!r.is_array() || r.size() != 2)
            throw vx::validation_error(
                "config: field \"pre_post_distance_range_voxels\" must be [min,max]");
        cfg.pre_post_min = get_number(r.at(0), "pre_post_distance_range_voxels");
        cfg.pre_post_max = get_number(r.at(1), "pre_post_distance_range_voxels");
    }
    if (j.contains("blob_sigma_voxels"))
        cfg.blob_sigma = get_number(j["blob_sigma_voxels"], "blob_sigma_voxels");
    if (j.contains("noise_std")) cfg.noise_std = get_number(j["noise_std"], "noise_std");
    if (j.contains("clutter_density"))
        cfg.clutter_density = get_number(j["clutter_density"], "clutter_density");
    if (j.contains("seed"))
        cfg.seed = static_cast<std::uint64_t>(
            std::llround(get_number(j["seed"], "seed")));
    if (j.contains("min_site_separation_voxels"))
        cfg.min_site_separation =
            get_number(j["min_site_separation_voxels"], "min_site_separation_voxels");
    if (j.contains("nearest_margin_voxels"))
        cfg.nearest_margin = get_number(j["nearest_margin_voxels"], "nearest_margin_voxels");
    if (j.contains("border_margin_voxels"))
        cfg.border_margin = get_number(j["border_margin_voxels"], "border_margin_voxels");
    if (j.contains("render"))
        cfg.render = vx::render_mode_from_string(get_string(j["render"], "render"));
    if (j.contains("sphere_radius_voxels"))
        cfg.sphere_radius = get_number(j["sphere_radius_voxels"], "sphere_radius_voxels");
    return cfg;
}

ordered_json synth_config_to_json(const vx::SynthConfig& cfg) {
    ordered_json j;
    j["shape"] = {cfg.shape[0], cfg.shape[1], cfg.shape[2]};
    j["n_synapses"] = cfg.n_synapses;
    ordered_json fan = ordered_json::object();
    for (const auto& [k, p] : cfg.fanout) fan[std::to_string(k)] = p;
    j["fanout"] = fan;
    j["pre_post_distance_range_voxels"] = {cfg.pre_post_min, cfg.pre_post_max};
    j["blob_sigma_voxels"] = cfg.blob_sigma;
    j["noise_std"] = cfg.noise_std;
    j["clutter_density"] = cfg.clutter_density;
    j["seed"] = cfg.seed;
    j["min_site_separation_voxels"] = cfg.min_site_separation;
    j["nearest_margin_voxels"] = cfg.nearest_margin;
    j["border_margin_voxels"] = cfg.border_margin;
    j["render"] = vx::to_string(cfg.render);
    j["sphere_radius_voxels"] = cfg.sphere_radius;
    return j;
}

vx::Shape3 parse_shape(const std::string& s) {
    vx::Shape3 shape{};
    std::size_t pos = 0;
    for (int a = 0; a < 3; ++a) {
        const std::size_t next = s.find(',', pos);
        const std::string tok = next == std::string::npos ? s.substr(pos)
                                                          : s.substr(pos, next - pos);
        try {
            shape[static_cast<std::size_t>(a)] = std::stoll(tok);
        } catch (...) {
            throw vx::validation_error("bad shape \"" + s + "\": expected Z,Y,X integers");
        }
        if (a < 2) {
            if (next == std::string::npos)
                throw vx::validation_error("bad shape \"" + s + "\": expected Z,Y,X integers");
            pos = next + 1;
        } else if (next != std::string::npos) {
            throw vx::validation_error("bad shape \"" + s + "\": expected Z,Y,X integers");
        }
    }
    return shape;
}

// Probability input for the decoding pipeline: float32 prob volumes pass
// through, binary uint8 volumes (clean targets) are promoted to 0/1 floats.
vx::Grid3<float> load_prob_grid(const std::string& path) {
    const vx::Volume3D vol = vx::read_volume(path);
    if (!vol.is_uint8()) {
        if (vol.meta.kind != vx::VolumeKind::prob)
            throw vx::validation_error("volume " + path +
                                       " is float32 but not marked kind=prob");
        return vol.as_float();
    }
    const auto& g = vol.as_uint8();
    vx::Grid3<float> out(g.shape());
    for (std::int64_t i = 0; i < g.size(); ++i) {
        if (g[i] > 1)
            throw vx::validation_error("volume " + path +
                                       " is uint8 but not binary; cannot use as probabilities");
        out[i] = static_cast<float>(g[i]);
    }
    return out;
}

ordered_json channel_report_json(const vx::ChannelReport& r) {
    ordered_json j;
    j["tau"] = r.tau;
    j["tau_warning"] = r.tau_warning;
    j["mask_voxels"] = r.mask_voxels;
    j["components"] = r.component_count;
    j["peaks"] = r.peak_count;
    j["filtered"] = r.filtered_count;
    return j;
}

// ---------------------------------------------------------------------------
// evaluate helpers
// ---------------------------------------------------------------------------

struct EvalRow {
    std::string channel;
    vx::MatchResult result;
    bool degenerate = false;
};

ordered_json match_result_json(const vx::MatchResult& m, bool degenerate) {
    ordered_json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    const double denom_p = static_cast<double>(m.tp + m.fp);
    const double denom_r = static_cast<double>(m.tp + m.fn);
    j["precision"] = denom_p > 0 ? static_cast<double>(m.tp) / denom_p : 0.0;
    j["recall"] = denom_r > 0 ? static_cast<double>(m.tp) / denom_r : 0.0;
    j["f1"] = vx::f1(m.tp, m.fp, m.fn);
    j["degenerate"] = degenerate;
    j["threshold_voxels"] = m.threshold_voxels;
    j["matches"] = ordered_json::array();
    for (const auto& e : m.matches)
        j["matches"].push_back({{"detected_id", e.detected_id},
                                {"truth_id", e.truth_id},
                                {"distance_voxels", e.distance_voxels}});
    j["unmatched_detected"] = m.unmatched_detected;
    j["unmatched_truth"] = m.unmatched_truth;
    return j;
}

ordered_json degree_histogram_json(const vx::DegreeHistogram& h) {
    ordered_json j;
    ordered_json exact = ordered_json::object();
    for (const auto& [k, v] : h.exact) exact[std::to_string(k)] = v;
    j["exact"] = exact;
    ordered_json bucketed = ordered_json::object();
    for (const auto& [k, v] : h.bucketed) bucketed[k] = v;
    j["bucketed"] = bucketed;
    j["distinct_pre"] = h.distinct_pre;
    return j;
}

void write_eval_csv(const std::string& path, const std::string& label,
                    const std::vector<EvalRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw vx::format_error("cannot write report CSV: " + path);
    out << "volume,channel,tp,fp,fn,precision,recall,f1,threshold_voxels\n";
    for (const auto& r : rows) {
        const auto& m = r.result;
        const double denom_p = static_cast<double>(m.tp + m.fp);
        const double denom_r = static_cast<double>(m.tp + m.fn);
        out << label << ',' << r.channel << ',' << m.tp << ',' << m.fp << ',' << m.fn << ','
            << vx::detail::shortest_double(denom_p > 0 ? m.tp / denom_p : 0.0) << ','
            << vx::detail::shortest_double(denom_r > 0 ? m.tp / denom_r : 0.0) << ','
            << vx::detail::shortest_double(vx::f1(m.tp, m.fp, m.fn)) << ','
            << vx::detail::shortest_double(m.threshold_voxels) << '\n';
    }
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

struct CommonOpts {
    int threads = 1;
};

struct MakeTargetsOpts {
    std::string pre_csv, post_csv, out_prefix;
    std::string shape_str;
    double radius = 4.0;
    double voxel_size_nm = 8.0;
};

void run_make_targets(const MakeTargetsOpts& o, const CommonOpts& common) {
    Manifest man("make-targets", common.threads);
    man.input("pre_points", o.pre_csv);
    man.input("post_points", o.post_csv);

    const vx::Shape3 shape = parse_shape(o.shape_str);
    vx::TargetConfig tc;
    tc.radius_voxels = o.radius;
    man.j["config"] = {{"shape", {shape[0], shape[1], shape[2]}},
                       {"radius_voxels", tc.radius_voxels},
                       {"voxel_size_nm", o.voxel_size_nm}};

    const vx::PointSet pre = vx::read_points(o.pre_csv, vx::Channel::pre);
    const vx::PointSet post = vx::read_points(o.post_csv, vx::Channel::post);
    pre.validate_unique_ids();
    post.validate_unique_ids();

    auto [pre_target, post_target] = vx::render_targets(pre, post, shape, tc);
    const vx::WeightMap pre_w = vx::compute_weight_map(pre_target);
    const vx::WeightMap post_w = vx::compute_weight_map(post_target);

    vx::VolumeMeta meta;
    meta.voxel_size_nm = {o.voxel_size_nm, o.voxel_size_nm, o.voxel_size_nm};
    meta.kind = vx::VolumeKind::label;
    auto write_vol = [&](const std::string& role, const std::string& path, vx::Volume3D v) {
        vx::write_volume(v, path);
        man.output(role, path);
        man.output(role + "_raw", vx::detail::raw_path_for(path).string());
    };
    write_vol("pre_target", o.out_prefix + "_pre_target.json",
              vx::Volume3D{pre_target, meta});
    write_vol("post_target", o.out_prefix + "_post_target.json",
              vx::Volume3D{post_target, meta});
    vx::VolumeMeta wmeta = meta;
    wmeta.kind = vx::VolumeKind::raw;
    write_vol("pre_weight", o.out_prefix + "_pre_weight.json",
              vx::Volume3D{pre_w.grid, wmeta});
    write_vol("post_weight", o.out_prefix + "_post_weight.json",
              vx::Volume3D{post_w.grid, wmeta});

    man.j["counts"] = {{"pre_points", pre.points.size()},
                       {"post_points", post.points.size()}};
    man.j["weights"] = {{"pre", {{"fg", pre_w.fg_weight}, {"bg", pre_w.bg_weight}}},
                        {"post", {{"fg", post_w.fg_weight}, {"bg", post_w.bg_weight}}}};
    man.write(o.out_prefix + "_manifest.json");
}

struct DetectOpts {
    std::string pre_prob, post_prob, out_prefix;
    std::string config_path;
    std::vector<std::string> batch_pre, batch_post;
    // flag overrides; CLI11 marks which were provided
    std::string threshold_mode, peak_method, filter_mode;
    double tau = 0.0, rho = 0.0, min_distance = 0.0, threshold_abs = 0.0;
    double sigma_min = 0.0, sigma_max = 0.0, blob_threshold = 0.0;
    int num_sigma = 0;
    double d_min = 0.0, pairing_max = 0.0;
    CLI::App* cmd = nullptr;
};

vx::DetectionConfig resolve_detection_config(const DetectOpts& o) {
    vx::DetectionConfig cfg;
    if (!o.config_path.empty()) cfg = detection_config_from_json(load_json_file(o.config_path));
    const auto given = [&](const char* flag) { return o.cmd->count(flag) > 0; };
    if (given("--threshold-mode"))
        cfg.threshold.mode = vx::threshold_mode_from_string(o.threshold_mode);
    if (given("--tau")) cfg.threshold.tau_abs = o.tau;
    if (given("--rho")) cfg.threshold.rho = o.rho;
    if (given("--peak-method")) cfg.peak_method = vx::peak_method_from_string(o.peak_method);
    if (given("--min-distance")) cfg.peak.min_distance = o.min_distance;
    if (given("--threshold-abs")) cfg.peak.threshold_abs = static_cast<float>(o.threshold_abs);
    if (given("--sigma-min")) cfg.blob.sigma_min = o.sigma_min;
    if (given("--sigma-max")) cfg.blob.sigma_max = o.sigma_max;
    if (given("--num-sigma")) cfg.blob.num_sigma = o.num_sigma;
    if (given("--blob-threshold")) cfg.blob.blob_threshold = static_cast<float>(o.blob_threshold);
    if (given("--filter-mode")) cfg.filter.mode = vx::filter_mode_from_string(o.filter_mode);
    if (given("--d-min")) cfg.filter.d_min = o.d_min;
    if (given("--pairing-max-distance")) cfg.pairing_max_distance = o.pairing_max;
    cfg.validate();
    return cfg;
}

void run_detect(const DetectOpts& o, const CommonOpts& common) {
    Manifest man("detect", common.threads);
    const vx::DetectionConfig cfg = resolve_detection_config(o);
    man.j["config"] = detection_config_to_json(cfg);
    man.input_volume("pre_prob", o.pre_prob);
    man.input_volume("post_prob", o.post_prob);
    if (!o.config_path.empty()) man.input("config", o.config_path);

    const vx::Grid3<float> pre_prob = load_prob_grid(o.pre_prob);
    const vx::Grid3<float> post_prob = load_prob_grid(o.post_prob);

    std::vector<vx::Grid3<float>> batch_storage;
    vx::BatchContext context;
    for (std::size_t i = 0; i < o.batch_pre.size(); ++i) {
        man.input_volume("batch_pre_" + std::to_string(i), o.batch_pre[i]);
        batch_storage.push_back(load_prob_grid(o.batch_pre[i]));
    }
    for (std::size_t i = 0; i < o.batch_post.size(); ++i) {
        man.input_volume("batch_post_" + std::to_string(i), o.batch_post[i]);
        batch_storage.push_back(load_prob_grid(o.batch_post[i]));
    }
    for (std::size_t i = 0; i < o.batch_pre.size(); ++i)
        context.pre.push_back(&batch_storage[i]);
    for (std::size_t i = 0; i < o.batch_post.size(); ++i)
        context.post.push_back(&batch_storage[o.batch_pre.size() + i]);

    const vx::DetectResult result =
        vx::detect(pre_prob, post_prob, cfg, context, common.threads);

    const std::string pre_path = o.out_prefix + "_pre.csv";
    const std::string post_path = o.out_prefix + "_post.csv";
    const std::string pairs_path = o.out_prefix + "_pairs.json";
    vx::write_points(result.pre_points, pre_path);
    vx::write_points(result.post_points, post_path);
    vx::write_pairs(result.pairing.pairs, pairs_path);
    man.output("pre_points", pre_path);
    man.output("post_points", post_path);
    man.output("pairs", pairs_path);

    man.j["channels"] = {{"pre", channel_report_json(result.pre_report)},
                         {"post", channel_report_json(result.post_report)}};
    man.j["pairing"] = {{"pairs", result.pairing.pairs.pairs.size()},
                        {"unpaired_post_ids", result.pairing.unpaired_post_ids}};
    man.write(o.out_prefix + "_manifest.json");
}

struct EvaluateOpts {
    std::string detected_pre, detected_post, truth_pre, truth_post, out_prefix;
    std::string detected_pairs, truth_pairs;
    std::string label = "volume";
    std::string matching = "clamped";
    double threshold = 120.0;
    double threshold_nm = 0.0;
    double voxel_size_nm = 8.0;
    CLI::App* cmd = nullptr;
};

void run_evaluate(const EvaluateOpts& o, const CommonOpts& common) {
    Manifest man("evaluate", common.threads);
    man.input("detected_pre", o.detected_pre);
    man.input("detected_post", o.detected_post);
    man.input("truth_pre", o.truth_pre);
    man.input("truth_post", o.truth_post);

    double threshold = o.threshold;
    if (o.cmd->count("--threshold-nm") > 0) {
        if (!(o.voxel_size_nm > 0.0))
            throw vx::validation_error("evaluate: --voxel-size-nm must be > 0");
        threshold = o.threshold_nm / o.voxel_size_nm;
    }
    if (!(threshold > 0.0))
        throw vx::validation_error("evaluate: threshold must be > 0");
    const vx::MatchingMode mode = vx::matching_mode_from_string(o.matching);

    man.j["config"] = {{"label", o.label},
                       {"threshold_voxels", threshold},
                       {"matching", o.matching}};

    const vx::PointSet dpre = vx::read_points(o.detected_pre, vx::Channel::pre);
    const vx::PointSet dpost = vx::read_points(o.detected_post, vx::Channel::post);
    const vx::PointSet tpre = vx::read_points(o.truth_pre, vx::Channel::pre);
    const vx::PointSet tpost = vx::read_points(o.truth_post, vx::Channel::post);

    std::vector<EvalRow> rows;
    const vx::MatchResult m_pre = vx::match_sites(dpre, tpre, threshold, mode);
    const vx::MatchResult m_post = vx::match_sites(dpost, tpost, threshold, mode);
    rows.push_back({"pre", m_pre, 2 * m_pre.tp + m_pre.fp + m_pre.fn == 0});
    rows.push_back({"post", m_post, 2 * m_post.tp + m_post.fp + m_post.fn == 0});

    ordered_json report;
    report["label"] = o.label;
    report["matching"] = o.matching;
    report["threshold_voxels"] = threshold;
    report["pre"] = match_result_json(m_pre, rows[0].degenerate);
    report["post"] = match_result_json(m_post, rows[1].degenerate);

    const bool with_pairs = !o.detected_pairs.empty() && !o.truth_pairs.empty();
    if (!o.detected_pairs.empty() != !o.truth_pairs.empty())
        throw vx::validation_error(
            "evaluate: --detected-pairs and --truth-pairs must be given together");
    if (with_pairs) {
        man.input("detected_pairs", o.detected_pairs);
        man.input("truth_pairs", o.truth_pairs);
        const vx::SynapsePairSet dpairs = vx::read_pairs(o.detected_pairs);
        const vx::SynapsePairSet tpairs = vx::read_pairs(o.truth_pairs);
        const vx::PairedVolume dv{&dpairs, &dpre, &dpost};
        const vx::PairedVolume tv{&tpairs, &tpre, &tpost};
        const vx::MatchResult m_pairs = vx::match_pairs(dv, tv, threshold, mode);
        rows.push_back({"pairs", m_pairs, 2 * m_pairs.tp + m_pairs.fp + m_pairs.fn == 0});
        report["pairs"] = match_result_json(m_pairs, rows[2].degenerate);
        report["degree_histogram"] = {
            {"detected", degree_histogram_json(vx::degree_histogram(dpairs))},
            {"truth", degree_histogram_json(vx::degree_histogram(tpairs))}};
    }

    const std::string json_path = o.out_prefix + "_report.json";
    const std::string csv_path = o.out_prefix + "_report.csv";
    {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) throw vx::format_error("cannot write report: " + json_path);
        out << report.dump(2) << "\n";
    }
    write_eval_csv(csv_path, o.label, rows);
    man.output("report_json", json_path);
    man.output("report_csv", csv_path);
    man.write(o.out_prefix + "_manifest.json");
}

struct SimilarityOpts {
    std::vector<std::string> groups;
    std::string metric = "ssim";
    std::string out_prefix;
    int size = 32;
    std::int64_t budget = 10000;
    std::uint64_t seed = 0;
    bool raw = false;
};

void run_similarity(const SimilarityOpts& o, const CommonOpts& common) {
    Manifest man("similarity", common.threads);
    const vx::Metric metric = vx::metric_from_string(o.metric);

    std::vector<vx::PatchSet> groups;
    ordered_json group_meta = ordered_json::array();
    for (std::size_t gi = 0; gi < o.groups.size(); ++gi) {
        const std::string& spec = o.groups[gi];
        // VOLUME.json:POINTS.csv[:LABEL]
        const std::size_t c1 = spec.find(':');
        if (c1 == std::string::npos)
            throw vx::validation_error("--group expects VOLUME:POINTS[:LABEL], got \"" +
                                       spec + "\"");
        const std::size_t c2 = spec.find(':', c1 + 1);
        const std::string vol_path = spec.substr(0, c1);
        const std::string pts_path = c2 == std::string::npos
                                         ? spec.substr(c1 + 1)
                                         : spec.substr(c1 + 1, c2 - c1 - 1);
        std::string label = c2 == std::string::npos ? std::string{} : spec.substr(c2 + 1);
        if (label.empty())
            label = std::filesystem::path(vol_path).stem().string();
        for (auto& ch : label)
            if (ch == ',') ch = '_';

        man.input_volume("volume_" + std::to_string(gi), vol_path);
        man.input("points_" + std::to_string(gi), pts_path);
        const vx::Volume3D vol = vx::read_volume(vol_path);
        const vx::PointSet pts = vx::read_points(pts_path, vx::Channel::pre);
        vx::PatchSet ps = vx::extract_patches(vx::to_float_grid(vol), pts, o.size, !o.raw,
                                              label);
        group_meta.push_back({{"label", label},
                              {"patches", ps.patches.size()},
                              {"skipped", ps.skipped}});
        groups.push_back(std::move(ps));
    }

    const vx::SimilarityMatrix mat =
        vx::similarity_matrix(groups, metric, o.seed, o.budget, common.threads);

    const std::string csv_path = o.out_prefix + "_matrix.csv";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw vx::format_error("cannot write matrix CSV: " + csv_path);
        for (const auto& label : mat.labels) out << ',' << label;
        out << '\n';
        for (std::size_t i = 0; i < mat.labels.size(); ++i) {
            out << mat.labels[i];
            for (std::size_t j = 0; j < mat.labels.size(); ++j) {
                out << ',';
                if (mat.defined[i][j]) out << vx::detail::shortest_double(mat.values[i][j]);
            }
            out << '\n';
        }
    }
    man.output("matrix_csv", csv_path);

    const std::string meta_path = o.out_prefix + "_meta.json";
    {
        ordered_json meta;
        meta["metric"] = o.metric;
        meta["seed"] = o.seed;
        meta["pair_budget"] = o.budget;
        meta["patch_size"] = o.size;
        meta["normalized"] = !o.raw;
        meta["groups"] = group_meta;
        ordered_json counts = ordered_json::array();
        for (const auto& row : mat.pair_counts) counts.push_back(row);
        meta["pair_counts"] = counts;
        std::ofstream out(meta_path, std::ios::binary);
        if (!out) throw vx::format_error("cannot write matrix metadata: " + meta_path);
        out << meta.dump(2) << "\n";
    }
    man.output("meta_json", meta_path);
    man.j["config"] = {{"metric", o.metric}, {"seed", o.seed},
                       {"pair_budget", o.budget}, {"patch_size", o.size},
                       {"normalized", !o.raw}};
    man.write(o.out_prefix + "_manifest.json");
}

struct SynthOpts {
    std::string config_path, out_prefix;
    std::string shape_str, fanout_str, range_str, render;
    int n_synapses = 0;
    double sigma = 0.0, noise_std = 0.0, clutter = 0.0, sphere_radius = 0.0;
    double min_separation = 0.0, nearest_margin = 0.0, border_margin = 0.0;
    std::uint64_t seed = 0;
    CLI::App* cmd = nullptr;
};

vx::SynthConfig resolve_synth_config(const SynthOpts& o) {
    vx::SynthConfig cfg;
    if (!o.config_path.empty()) cfg = synth_config_from_json(load_json_file(o.config_path));
    const auto given = [&](const char* flag) { return o.cmd->count(flag) > 0; };
    if (given("--shape")) cfg.shape = parse_shape(o.shape_str);
    if (given("--n-synapses")) cfg.n_synapses = o.n_synapses;
    if (given("--fanout")) {
        cfg.fanout.clear();
        std::stringstream ss(o.fanout_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::size_t c = tok.find(':');
            if (c == std::string::npos)
                throw vx::validation_error("--fanout expects K:P pairs, got \"" + tok + "\"");
            try {
                cfg.fanout[std::stoi(tok.substr(0, c))] = std::stod(tok.substr(c + 1));
            } catch (const vx::validation_error&) {
                throw;
            } catch (...) {
                throw vx::validation_error("--fanout expects K:P pairs, got \"" + tok + "\"");
            }
        }
    }
    if (given("--distance-range")) {
        const std::size_t c = o.range_str.find(',');
        if (c == std::string::npos)
            throw vx::validation_error("--distance-range expects MIN,MAX");
        try {
            cfg.pre_post_min = std::stod(o.range_str.substr(0, c));
            cfg.pre_post_max = std::stod(o.range_str.substr(c + 1));
        } catch (...) {
            throw vx::validation_error("--distance-range expects MIN,MAX");
        }
    }
    if (given("--sigma")) cfg.blob_sigma = o.sigma;
    if (given("--noise-std")) cfg.noise_std = o.noise_std;
    if (given("--clutter-density")) cfg.clutter_density = o.clutter;
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--min-separation")) cfg.min_site_separation = o.min_separation;
    if (given("--nearest-margin")) cfg.nearest_margin = o.nearest_margin;
    if (given("--border-margin")) cfg.border_margin = o.border_margin;
    if (given("--render")) cfg.render = vx::render_mode_from_string(o.render);
    if (given("--sphere-radius")) cfg.sphere_radius = o.sphere_radius;
    cfg.validate();
    return cfg;
}

void run_synth(const SynthOpts& o, const CommonOpts& common) {
    Manifest man("synth", common.threads);
    const vx::SynthConfig cfg = resolve_synth_config(o);
    if (!o.config_path.empty()) man.input("config", o.config_path);
    man.j["config"] = synth_config_to_json(cfg);
    man.j["seed"] = cfg.seed;

    const vx::SynthResult res = vx::generate(cfg);

    vx::VolumeMeta meta;
    meta.kind = vx::VolumeKind::prob;
    const std::string pre_vol = o.out_prefix + "_pre_prob.json";
    const std::string post_vol = o.out_prefix + "_post_prob.json";
    vx::write_volume(vx::Volume3D{res.pre_prob, meta}, pre_vol);
    vx::write_volume(vx::Volume3D{res.post_prob, meta}, post_vol);
    const std::string pre_csv = o.out_prefix + "_pre.csv";
    const std::string post_csv = o.out_prefix + "_post.csv";
    const std::string pairs_json = o.out_prefix + "_pairs.json";
    vx::write_points(res.pre, pre_csv);
    vx::write_points(res.post, post_csv);
    vx::write_pairs(res.pairs, pairs_json);

    man.output("pre_prob", pre_vol);
    man.output("pre_prob_raw", vx::detail::raw_path_for(pre_vol).string());
    man.output("post_prob", post_vol);
    man.output("post_prob_raw", vx::detail::raw_path_for(post_vol).string());
    man.output("pre_points", pre_csv);
    man.output("post_points", post_csv);
    man.output("pairs", pairs_json);
    man.j["counts"] = {{"pre_sites", res.pre.points.size()},
                       {"post_sites", res.post.points.size()},
                       {"pairs", res.pairs.pairs.size()}};
    man.write(o.out_prefix + "_manifest.json");
}

struct SweepOpts {
    std::string pre_prob, post_prob, out_prefix;
    std::string config_path;
    std::string param;
    std::vector<double> values;
    std::string truth_pre, truth_post, truth_pairs;
    double eval_threshold = 120.0;
};

void set_json_path(nlohmann::json& j, const std::string& dotted, double value) {
    nlohmann::json* cur = &j;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = dotted.find('.', pos);
        const std::string key = next == std::string::npos ? dotted.substr(pos)
                                                          : dotted.substr(pos, next - pos);
        if (key.empty())
            throw vx::validation_error("sweep: bad --param path \"" + dotted + "\"");
        if (next == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        pos = next + 1;
    }
}

void run_sweep(const SweepOpts& o, const CommonOpts& common) {
    if (o.values.empty()) throw vx::validation_error("sweep: --values must be non-empty");
    Manifest man("sweep", common.threads);
    man.input_volume("pre_prob", o.pre_prob);
    man.input_volume("post_prob", o.post_prob);
    if (!o.config_path.empty()) man.input("config", o.config_path);

    nlohmann::json base = o.config_path.empty()
                              ? nlohmann::json(detection_config_to_json(vx::DetectionConfig{}))
                              : load_json_file(o.config_path);
    // the base must itself resolve before any cell overrides it
    detection_config_from_json(base).validate();

    const bool with_truth = !o.truth_pre.empty() && !o.truth_post.empty();
    if (!o.truth_pre.empty() != !o.truth_post.empty())
        throw vx::validation_error("sweep: --truth-pre and --truth-post go together");
    if (with_truth) {
        man.input("truth_pre", o.truth_pre);
        man.input("truth_post", o.truth_post);
        if (!o.truth_pairs.empty()) man.input("truth_pairs", o.truth_pairs);
    }

    const vx::Grid3<float> pre_prob = load_prob_grid(o.pre_prob);
    const vx::Grid3<float> post_prob = load_prob_grid(o.post_prob);
    vx::PointSet tpre, tpost;
    vx::SynapsePairSet tpairs;
    if (with_truth) {
        tpre = vx::read_points(o.truth_pre, vx::Channel::pre);
        tpost = vx::read_points(o.truth_post, vx::Channel::post);
        if (!o.truth_pairs.empty()) tpairs = vx::read_pairs(o.truth_pairs);
    }

    const std::string summary_path = o.out_prefix + "_summary.csv";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw vx::format_error("cannot write sweep summary: " + summary_path);
    summary << "param,value,tau_pre,tau_post,components_pre,components_post,peaks_pre,"
               "peaks_post,filtered_pre,filtered_post,pairs,unpaired_posts";
    if (with_truth) {
        summary << ",tp_pre,fp_pre,fn_pre,f1_pre,tp_post,fp_post,fn_post,f1_post";
        if (!o.truth_pairs.empty()) summary << ",tp_pairs,fp_pairs,fn_pairs,f1_pairs";
    }
    summary << '\n';

    ordered_json cells = ordered_json::array();
    for (std::size_t k = 0; k < o.values.size(); ++k) {
        nlohmann::json cell_json = base;
        set_json_path(cell_json, o.param, o.values[k]);
        const vx::DetectionConfig cfg = detection_config_from_json(cell_json);
        cfg.validate();

        const vx::DetectResult result =
            vx::detect(pre_prob, post_prob, cfg, {}, common.threads);

        const std::string cell_prefix = o.out_prefix + "_cell" + std::to_string(k);
        vx::write_points(result.pre_points, cell_prefix + "_pre.csv");
        vx::write_points(result.post_points, cell_prefix + "_post.csv");
        vx::write_pairs(result.pairing.pairs, cell_prefix + "_pairs.json");

        Manifest cell_man("sweep-cell", common.threads);
        cell_man.j["config"] = detection_config_to_json(cfg);
        cell_man.j["sweep"] = {{"param", o.param}, {"value", o.values[k]}, {"cell", k}};
        cell_man.input_volume("pre_prob", o.pre_prob);
        cell_man.input_volume("post_prob", o.post_prob);
        cell_man.output("pre_points", cell_prefix + "_pre.csv");
        cell_man.output("post_points", cell_prefix + "_post.csv");
        cell_man.output("pairs", cell_prefix + "_pairs.json");
        cell_man.j["channels"] = {{"pre", channel_report_json(result.pre_report)},
                                  {"post", channel_report_json(result.post_report)}};
        cell_man.write(cell_prefix + "_manifest.json");

        summary << o.param << ',' << vx::detail::shortest_double(o.values[k]) << ','
                << vx::detail::shortest_double(result.pre_report.tau) << ','
                << vx::detail::shortest_double(result.post_report.tau) << ','
                << result.pre_report.component_count << ','
                << result.post_report.component_count << ',' << result.pre_report.peak_count
                << ',' << result.post_report.peak_count << ','
                << result.pre_report.filtered_count << ','
                << result.post_report.filtered_count << ','
                << result.pairing.pairs.pairs.size() << ','
                << result.pairing.unpaired_post_ids.size();

        ordered_json cell_entry;
        cell_entry["cell"] = k;
        cell_entry["value"] = o.values[k];
        cell_entry["manifest"] = cell_prefix + "_manifest.json";
        if (with_truth) {
            const vx::MatchResult m_pre =
                vx::match_sites(result.pre_points, tpre, o.eval_threshold);
            const vx::MatchResult m_post =
                vx::match_sites(result.post_points, tpost, o.eval_threshold);
            summary << ',' << m_pre.tp << ',' << m_pre.fp << ',' << m_pre.fn << ','
                    << vx::detail::shortest_double(vx::f1(m_pre.tp, m_pre.fp, m_pre.fn))
                    << ',' << m_post.tp << ',' << m_post.fp << ',' << m_post.fn << ','
                    << vx::detail::shortest_double(vx::f1(m_post.tp, m_post.fp, m_post.fn));
            cell_entry["f1_pre"] = vx::f1(m_pre.tp, m_pre.fp, m_pre.fn);
            cell_entry["f1_post"] = vx::f1(m_post.tp, m_post.fp, m_post.fn);
            if (!o.truth_pairs.empty()) {
                const vx::PairedVolume dv{&result.pairing.pairs, &result.pre_points,
                                          &result.post_points};
                const vx::PairedVolume tv{&tpairs, &tpre, &tpost};
                const vx::MatchResult m_pairs = vx::match_pairs(dv, tv, o.eval_threshold);
                summary << ',' << m_pairs.tp << ',' << m_pairs.fp << ',' << m_pairs.fn << ','
                        << vx::detail::shortest_double(
                               vx::f1(m_pairs.tp, m_pairs.fp, m_pairs.fn));
                cell_entry["f1_pairs"] = vx::f1(m_pairs.tp, m_pairs.fp, m_pairs.fn);
            }
        }
        summary << '\n';
        cells.push_back(cell_entry);
    }
    summary.close();

    man.j["config"] = {{"param", o.param},
                       {"values", o.values},
                       {"eval_threshold_voxels", o.eval_threshold},
                       {"base", nlohmann::json(base)}};
    man.j["cells"] = cells;
    man.output("summary_csv", summary_path);
    man.write(o.out_prefix + "_manifest.json");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volumetric synapse detection toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--threads", common.threads, "Worker threads (outputs are independent of this)")
        ->check(CLI::Range(1, 64));

    MakeTargetsOpts mt;
    CLI::App* c_mt = app.add_subcommand("make-targets",
                                        "Render spherical training targets and weight maps");
    c_mt->add_option("pre_csv", mt.pre_csv, "Pre-synaptic points CSV")->required();
    c_mt->add_option("post_csv", mt.post_csv, "Post-synaptic points CSV")->required();
    c_mt->add_option("--shape", mt.shape_str, "Volume shape Z,Y,X")->required();
    c_mt->add_option("--radius", mt.radius, "Sphere radius in voxels");
    c_mt->add_option("--voxel-size-nm", mt.voxel_size_nm, "Isotropic voxel size in nm");
    c_mt->add_option("--out", mt.out_prefix, "Output prefix")->required();

    DetectOpts dt;
    CLI::App* c_dt = app.add_subcommand("detect", "Decode probability volumes into sites and pairs");
    dt.cmd = c_dt;
    c_dt->add_option("pre_prob", dt.pre_prob, "Pre-channel probability volume (VOL1 header)")
        ->required();
    c_dt->add_option("post_prob", dt.post_prob, "Post-channel probability volume (VOL1 header)")
        ->required();
    c_dt->add_option("--config", dt.config_path, "Detection config JSON");
    c_dt->add_option("--out", dt.out_prefix, "Output prefix")->required();
    c_dt->add_option("--batch-pre", dt.batch_pre, "Extra pre volumes for relative_batch")
        ->delimiter(',');
    c_dt->add_option("--batch-post", dt.batch_post, "Extra post volumes for relative_batch")
        ->delimiter(',');
    c_dt->add_option("--threshold-mode", dt.threshold_mode,
                     "manual | auto | relative | relative_batch");
    c_dt->add_option("--tau", dt.tau, "Manual threshold in [0,1]");
    c_dt->add_option("--rho", dt.rho, "Relative threshold fraction in (0,1]");
    c_dt->add_option("--peak-method", dt.peak_method, "peak_local_max | blob_log");
    c_dt->add_option("--min-distance", dt.min_distance, "Peak separation in voxels (>= 1)");
    c_dt->add_option("--threshold-abs", dt.threshold_abs, "Peak absolute intensity floor");
    c_dt->add_option("--sigma-min", dt.sigma_min, "Smallest blob scale");
    c_dt->add_option("--sigma-max", dt.sigma_max, "Largest blob scale");
    c_dt->add_option("--num-sigma", dt.num_sigma, "Number of blob scales");
    c_dt->add_option("--blob-threshold", dt.blob_threshold, "Blob response floor");
    c_dt->add_option("--filter-mode", dt.filter_mode,
                     "none | by_distance | by_distance_and_mask");
    c_dt->add_option("--d-min", dt.d_min, "Distance filter radius in voxels");
    c_dt->add_option("--pairing-max-distance", dt.pairing_max,
                     "Pairing distance cutoff in voxels");

    EvaluateOpts ev;
    CLI::App* c_ev = app.add_subcommand("evaluate", "Score detections against ground truth");
    ev.cmd = c_ev;
    c_ev->add_option("detected_pre", ev.detected_pre, "Detected pre CSV")->required();
    c_ev->add_option("detected_post", ev.detected_post, "Detected post CSV")->required();
    c_ev->add_option("truth_pre", ev.truth_pre, "Truth pre CSV")->required();
    c_ev->add_option("truth_post", ev.truth_post, "Truth post CSV")->required();
    c_ev->add_option("--detected-pairs", ev.detected_pairs, "Detected pairs JSON");
    c_ev->add_option("--truth-pairs", ev.truth_pairs, "Truth pairs JSON");
    auto* thr_opt = c_ev->add_option("--threshold", ev.threshold, "Match threshold in voxels");
    c_ev->add_option("--threshold-nm", ev.threshold_nm, "Match threshold in nm")
        ->excludes(thr_opt);
    c_ev->add_option("--voxel-size-nm", ev.voxel_size_nm, "Voxel size for --threshold-nm");
    c_ev->add_option("--matching", ev.matching, "clamped | posthoc");
    c_ev->add_option("--label", ev.label, "Volume label for report rows");
    c_ev->add_option("--out", ev.out_prefix, "Output prefix")->required();

    SimilarityOpts sm;
    CLI::App* c_sm = app.add_subcommand("similarity", "Patch similarity matrix across datasets");
    c_sm->add_option("--group", sm.groups, "Dataset as VOLUME:POINTS[:LABEL] (repeatable)")
        ->required();
    c_sm->add_option("--metric", sm.metric, "ssim | cosine");
    c_sm->add_option("--size", sm.size, "Patch cube side (even)");
    c_sm->add_option("--budget", sm.budget, "Pair budget per matrix cell");
    c_sm->add_option("--seed", sm.seed, "Sampling seed");
    c_sm->add_flag("--raw", sm.raw, "Skip min-max patch normalisation");
    c_sm->add_option("--out", sm.out_prefix, "Output prefix")->required();

    SynthOpts sy;
    CLI::App* c_sy = app.add_subcommand("synth", "Generate a synthetic ground-truth dataset");
    sy.cmd = c_sy;
    c_sy->add_option("--config", sy.config_path, "Synth config JSON");
    c_sy->add_option("--shape", sy.shape_str, "Volume shape Z,Y,X");
    c_sy->add_option("--n-synapses", sy.n_synapses, "Number of pre sites");
    c_sy->add_option("--fanout", sy.fanout_str, "Fan-out distribution K:P,K:P,...");
    c_sy->add_option("--distance-range", sy.range_str, "Pre-post distance MIN,MAX voxels");
    c_sy->add_option("--sigma", sy.sigma, "Rendered blob sigma in voxels");
    c_sy->add_option("--noise-std", sy.noise_std, "Additive Gaussian noise std");
    c_sy->add_option("--clutter-density", sy.clutter, "Sub-threshold blobs per 1e6 voxels");
    c_sy->add_option("--seed", sy.seed, "Generation seed");
    c_sy->add_option("--min-separation", sy.min_separation, "Within-channel site separation");
    c_sy->add_option("--nearest-margin", sy.nearest_margin, "Post-to-foreign-pre margin");
    c_sy->add_option("--border-margin", sy.border_margin, "Distance of sites from faces");
    c_sy->add_option("--render", sy.render, "gaussian | spheres");
    c_sy->add_option("--sphere-radius", sy.sphere_radius, "Sphere radius (spheres render)");
    c_sy->add_option("--out", sy.out_prefix, "Output prefix")->required();

    SweepOpts sw;
    CLI::App* c_sw = app.add_subcommand("sweep", "Run detect over a grid of one config parameter");
    c_sw->add_option("pre_prob", sw.pre_prob, "Pre-channel probability volume")->required();
    c_sw->add_option("post_prob", sw.post_prob, "Post-channel probability volume")->required();
    c_sw->add_option("--config", sw.config_path, "Base detection config JSON");
    c_sw->add_option("--param", sw.param, "Dotted config path, e.g. filter.d_min_voxels")
        ->required();
    c_sw->add_option("--values", sw.values, "Values for the swept parameter")
        ->required()
        ->delimiter(',');
    c_sw->add_option("--truth-pre", sw.truth_pre, "Truth pre CSV for per-cell scoring");
    c_sw->add_option("--truth-post", sw.truth_post, "Truth post CSV for per-cell scoring");
    c_sw->add_option("--truth-pairs", sw.truth_pairs, "Truth pairs JSON for per-cell scoring");
    c_sw->add_option("--eval-threshold", sw.eval_threshold, "Match threshold in voxels");
    c_sw->add_option("--out", sw.out_prefix, "Output prefix")->required();

    // let --threads appear after the subcommand name as well
    for (CLI::App* sub : {c_mt, c_dt, c_ev, c_sm, c_sy, c_sw}) sub->fallthrough();

    c_mt->callback([&] { run_make_targets(mt, common); });
    c_dt->callback([&] { run_detect(dt, common); });
    c_ev->callback([&] { run_evaluate(ev, common); });
    c_sm->callback([&] { run_similarity(sm, common); });
    c_sy->callback([&] { run_synth(sy, common); });
    c_sw->callback([&] { run_sweep(sw, common); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const vx::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vx::format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
