#include "hyperseg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "hyperseg/errors.hpp"
#include "hyperseg/io.hpp"
#include "hyperseg/morphology.hpp"

namespace hyperseg {

namespace {

using nlohmann::json;

template <typename F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage ") + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string("stage ") + name + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("stage ") + name + ": " + e.what());
    }
}

} // namespace

DistanceName parse_distance_name(const std::string& text) {
    if (text == "euclidean") return DistanceName::Euclidean;
    if (text == "mahalanobis") return DistanceName::Mahalanobis;
    if (text == "mahalanobis_diag") return DistanceName::MahalanobisDiagonal;
    if (text == "chi_squared") return DistanceName::ChiSquared;
    throw ConfigError("unknown distance '" + text + "'");
}

DistanceKind resolve_distance(DistanceName name, const HyperCube& cube) {
    switch (name) {
    case DistanceName::Euclidean:
        return DistanceKind::euclidean();
    case DistanceName::Mahalanobis:
        if (cube.channels() < 2) {
            throw ConfigError("mahalanobis distance needs at least 2 channels");
        }
        return DistanceKind::mahalanobis_from_cube(cube, false);
    case DistanceName::MahalanobisDiagonal:
        if (cube.channels() < 2) {
            throw ConfigError("mahalanobis distance needs at least 2 channels");
        }
        return DistanceKind::mahalanobis_from_cube(cube, true);
    case DistanceName::ChiSquared:
        return DistanceKind::chi_squared_from_cube(cube);
    }
    throw ConfigError("unknown distance");
}

StructuringElement parse_structuring_element(const std::string& text) {
    if (text == "cross4") return StructuringElement::cross4();
    if (text == "square8") return StructuringElement::square8();
    if (text.rfind("disk:", 0) == 0) {
        try {
            return StructuringElement::disk(std::stoi(text.substr(5)));
        } catch (const std::exception&) {
            throw ConfigError("bad disk radius in '" + text + "'");
        }
    }
    throw ConfigError("unknown structuring element '" + text +
                      "' (expected cross4, square8 or disk:R)");
}

ClusteringSpec ClusterStageConfig::resolve(const HyperCube& space) const {
    ClusteringSpec spec;
    spec.k = k;
    spec.samples = samples;
    spec.sample_size = sample_size;
    spec.rng_seed = seed;
    spec.distance = resolve_distance(distance, space);
    return spec;
}

MarkerSpec MarkersConfig::resolve(const HyperCube& space) const {
    MarkerSpec spec;
    spec.stage1 = stage1.resolve(space);
    spec.select = select;
    spec.select_index = select_index;
    if (stage2.has_value()) spec.stage2 = stage2->resolve(space);
    spec.opening_radius = opening_radius;
    spec.background = background;
    spec.background_radius = background_radius;
    spec.connectivity = parse_structuring_element(connectivity);
    return spec;
}

GradientSpec GradientConfig::resolve(const HyperCube& space) const {
    GradientSpec spec;
    spec.kind = kind;
    spec.se = parse_structuring_element(se);
    spec.channel = channel;
    spec.weights = weights;
    if (kind == GradientSpec::Kind::Metric) {
        spec.distance = resolve_distance(distance, space);
    }
    return spec;
}

FloodSpec FloodConfig::resolve() const {
    FloodSpec spec;
    spec.levels = levels;
    spec.connectivity = parse_structuring_element(connectivity);
    spec.emit_lines = emit_lines;
    return spec;
}

void PipelineConfig::validate() const {
    int inputs = 0;
    if (!input_cube.empty()) ++inputs;
    if (!input_stack.empty()) ++inputs;
    if (synthetic.has_value()) ++inputs;
    if (inputs != 1) {
        throw ConfigError("config: exactly one of input.cube, input.stack or "
                          "input.synthetic must be given");
    }
    if (space == Space::FcaFactors && !fca_enabled) {
        throw ConfigError("config: space fca_factors requires fca.enabled");
    }
    if (gradient.kind == GradientSpec::Kind::Metric &&
        gradient.distance == DistanceName::ChiSquared && space != Space::FilteredImage) {
        throw ConfigError("config: the chi-squared gradient only runs on the "
                          "nonnegative filtered_image space");
    }
    if (gradient.kind == GradientSpec::Kind::WeightedSum && gradient.weights.empty() &&
        !gradient.weights_from_inertia) {
        throw ConfigError("config: weighted_sum gradient needs weights or "
                          "weights=\"inertia\"");
    }
    if (gradient.weights_from_inertia && space != Space::PcaParameters) {
        throw ConfigError("config: inertia weights are defined by the PCA space only");
    }
    if (!outputs.metrics.empty() && truth.empty() && !synthetic.has_value()) {
        throw ConfigError("config: outputs.metrics requested without a truth input");
    }
    if (epsilon_offset < 0.0) {
        throw ConfigError("config: epsilon_offset must be >= 0");
    }
}

namespace {

SyntheticRegion region_from_json(const json& doc) {
    SyntheticRegion region;
    const std::string shape = doc.value("shape", "disk");
    if (shape == "disk") {
        region.shape = SyntheticRegion::Shape::Disk;
        region.cx = doc.at("cx").get<int>();
        region.cy = doc.at("cy").get<int>();
        region.radius = doc.at("radius").get<int>();
    } else if (shape == "rect") {
        region.shape = SyntheticRegion::Shape::Rect;
        region.x0 = doc.at("x0").get<int>();
        region.y0 = doc.at("y0").get<int>();
        region.x1 = doc.at("x1").get<int>();
        region.y1 = doc.at("y1").get<int>();
    } else {
        throw ConfigError("synthetic region shape must be disk or rect");
    }
    region.slope = doc.value("slope", 0.0);
    region.intercept = doc.value("intercept", 0.0);
    region.rise = doc.value("rise", 0.0);
    return region;
}

SyntheticSpec synthetic_from_json(const json& doc) {
    SyntheticSpec spec;
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.channels = doc.value("channels", spec.channels);
    spec.transitory_channels = doc.value("transitory_channels", spec.transitory_channels);
    spec.noise_sigma = doc.value("noise_sigma", spec.noise_sigma);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("background")) {
        const json& bg = doc["background"];
        spec.background_slope = bg.value("slope", spec.background_slope);
        spec.background_intercept = bg.value("intercept", spec.background_intercept);
        spec.background_rise = bg.value("rise", spec.background_rise);
    }
    if (doc.contains("regions")) {
        for (const json& r : doc["regions"]) spec.regions.push_back(region_from_json(r));
    }
    return spec;
}

ClusterStageConfig cluster_stage_from_json(const json& doc) {
    ClusterStageConfig cfg;
    cfg.k = doc.value("k", cfg.k);
    cfg.samples = doc.value("samples", cfg.samples);
    cfg.sample_size = doc.value("sample_size", cfg.sample_size);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("distance")) {
        cfg.distance = parse_distance_name(doc["distance"].get<std::string>());
    }
    return cfg;
}

PipelineConfig config_from_json(const json& doc) {
    PipelineConfig cfg;
    if (doc.contains("input")) {
        const json& in = doc["input"];
        if (in.contains("cube")) cfg.input_cube = in["cube"].get<std::string>();
        if (in.contains("stack")) cfg.input_stack = in["stack"].get<std::string>();
        if (in.contains("synthetic")) cfg.synthetic = synthetic_from_json(in["synthetic"]);
    }
    if (doc.contains("truth")) cfg.truth = doc["truth"].get<std::string>();

    if (doc.contains("fca")) {
        const json& f = doc["fca"];
        cfg.fca_enabled = f.value("enabled", cfg.fca_enabled);
        cfg.fca_axes = f.value("axes", cfg.fca_axes);
        cfg.epsilon_offset = f.value("epsilon_offset", cfg.epsilon_offset);
    }

    if (doc.contains("space")) {
        const std::string s = doc["space"].get<std::string>();
        if (s == "filtered_image") cfg.space = PipelineConfig::Space::FilteredImage;
        else if (s == "fca_factors") cfg.space = PipelineConfig::Space::FcaFactors;
        else if (s == "parameters") cfg.space = PipelineConfig::Space::Parameters;
        else if (s == "pca_parameters") cfg.space = PipelineConfig::Space::PcaParameters;
        else throw ConfigError("unknown space '" + s + "'");
    }

    if (doc.contains("model")) {
        const json& m = doc["model"];
        cfg.model.transitory_channels = m.value("transitory_channels", 10);
        cfg.model.fit_begin = m.value("fit_begin", -1);
        cfg.model.fit_end = m.value("fit_end", -1);
        if (m.contains("x_values")) {
            cfg.model.x_values = m["x_values"].get<std::vector<double>>();
        }
        cfg.fit_on_raw = m.value("fit_on_raw", false);
    }
    if (doc.contains("pca")) {
        cfg.pca_axes = doc["pca"].value("axes", 0);
        cfg.pca_whiten = doc["pca"].value("whiten", false);
    }
    if (doc.contains("leveling")) {
        const json& l = doc["leveling"];
        cfg.leveling_enabled = l.value("enabled", true);
        cfg.leveling_gaussian_size = l.value("gaussian_size", 11);
        cfg.leveling_se = l.value("se", std::string("cross4"));
        cfg.leveling_max_iters = l.value("max_iters", 0);
        cfg.leveling_tolerance = l.value("tolerance", 1e-9);
    }

    if (doc.contains("markers")) {
        const json& m = doc["markers"];
        if (m.contains("stage1")) cfg.markers.stage1 = cluster_stage_from_json(m["stage1"]);
        if (m.contains("select")) {
            const json& sel = m["select"];
            if (sel.is_number_integer()) {
                cfg.markers.select = MarkerSpec::Select::Index;
                cfg.markers.select_index = sel.get<int>();
            } else {
                const std::string s = sel.get<std::string>();
                if (s == "smallest") cfg.markers.select = MarkerSpec::Select::Smallest;
                else if (s == "center") cfg.markers.select = MarkerSpec::Select::Center;
                else if (s == "all") cfg.markers.select = MarkerSpec::Select::All;
                else throw ConfigError("unknown marker selection '" + s + "'");
            }
        }
        if (m.contains("stage2") && !m["stage2"].is_null()) {
            cfg.markers.stage2 = cluster_stage_from_json(m["stage2"]);
        }
        cfg.markers.opening_radius = m.value("opening_radius", 5);
        if (m.contains("background")) {
            const std::string b = m["background"].get<std::string>();
            if (b == "none") cfg.markers.background = MarkerSpec::Background::None;
            else if (b == "eroded_complement")
                cfg.markers.background = MarkerSpec::Background::ErodedComplement;
            else throw ConfigError("unknown marker background '" + b + "'");
        }
        cfg.markers.background_radius = m.value("background_radius", -1);
        cfg.markers.connectivity = m.value("connectivity", std::string("square8"));
    }

    if (doc.contains("gradient")) {
        const json& g = doc["gradient"];
        if (g.contains("kind")) {
            const std::string k = g["kind"].get<std::string>();
            if (k == "marginal") cfg.gradient.kind = GradientSpec::Kind::Marginal;
            else if (k == "supremum") cfg.gradient.kind = GradientSpec::Kind::Supremum;
            else if (k == "weighted_sum") cfg.gradient.kind = GradientSpec::Kind::WeightedSum;
            else if (k == "metric") cfg.gradient.kind = GradientSpec::Kind::Metric;
            else throw ConfigError("unknown gradient kind '" + k + "'");
        }
        cfg.gradient.se = g.value("se", std::string("square8"));
        cfg.gradient.channel = g.value("channel", 0);
        if (g.contains("weights")) {
            if (g["weights"].is_string()) {
                if (g["weights"].get<std::string>() != "inertia") {
                    throw ConfigError("gradient weights must be an array or \"inertia\"");
                }
                cfg.gradient.weights_from_inertia = true;
            } else {
                cfg.gradient.weights = g["weights"].get<std::vector<double>>();
            }
        }
        if (g.contains("distance")) {
            cfg.gradient.distance = parse_distance_name(g["distance"].get<std::string>());
        }
    }

    if (doc.contains("flood")) {
        const json& f = doc["flood"];
        cfg.flood.levels = f.value("levels", 256);
        cfg.flood.connectivity = f.value("connectivity", std::string("square8"));
        cfg.flood.emit_lines = f.value("emit_lines", false);
    }

    if (doc.contains("outputs")) {
        const json& o = doc["outputs"];
        const auto path_of = [&o](const char* key) -> std::filesystem::path {
            return o.contains(key) ? std::filesystem::path(o[key].get<std::string>())
                                   : std::filesystem::path();
        };
        cfg.outputs.labels = path_of("labels");
        cfg.outputs.labels_png = path_of("labels_png");
        cfg.outputs.gradient = path_of("gradient");
        cfg.outputs.gradient_png = path_of("gradient_png");
        cfg.outputs.markers = path_of("markers");
        cfg.outputs.markers_png = path_of("markers_png");
        cfg.outputs.space = path_of("space");
        cfg.outputs.filtered = path_of("filtered");
        cfg.outputs.factors = path_of("factors");
        cfg.outputs.parameters = path_of("parameters");
        cfg.outputs.fca_model = path_of("fca_model");
        cfg.outputs.pca_model = path_of("pca_model");
        cfg.outputs.metrics = path_of("metrics");
        cfg.outputs.truth = path_of("truth");
    }
    return cfg;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

} // namespace

PipelineConfig pipeline_config_from_json_text(const std::string& text) {
    return config_from_json(parse_json_text(text));
}

PipelineConfig pipeline_config_from_json_file(const std::filesystem::path& path) {
    return pipeline_config_from_json_text(read_text_file(path));
}

SyntheticSpec synthetic_spec_from_json_text(const std::string& text) {
    return synthetic_from_json(parse_json_text(text));
}

SyntheticSpec synthetic_spec_from_json_file(const std::filesystem::path& path) {
    return synthetic_spec_from_json_text(read_text_file(path));
}

std::string apply_config_overrides(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
    json doc = parse_json_text(json_text);
    for (const std::string& entry : overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + entry + "' is not key=value");
        }
        std::string key = entry.substr(0, eq);
        const std::string value = entry.substr(eq + 1);
        std::replace(key.begin(), key.end(), '.', '/');
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;    // plain string
        }
        try {
            doc[json::json_pointer("/" + key)] = parsed;
        } catch (const json::exception& e) {
            throw ConfigError("cannot apply override '" + entry + "': " + e.what());
        }
    }
    return doc.dump();
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();

    // Input.
    HyperCube cube;
    std::optional<LabelImage> truth;
    stage("input", [&] {
        if (config.synthetic.has_value()) {
            SyntheticResult synth = generate_synthetic(*config.synthetic);
            cube = std::move(synth.cube);
            truth = std::move(synth.truth);
            if (!config.outputs.truth.empty()) write_label_hyp1(config.outputs.truth, *truth);
        } else if (!config.input_cube.empty()) {
            cube = read_hyp1(config.input_cube);
        } else {
            cube = read_channel_stack(config.input_stack);
        }
        if (!config.truth.empty()) truth = read_label_hyp1(config.truth);
        if (config.epsilon_offset > 0.0) {
            for (double& v : cube.data()) v += config.epsilon_offset;
        }
        return 0;
    });

    // FCA filtering and data reduction.
    HyperCube filtered;
    HyperCube factors;
    bool have_factors = false;
    stage("fca", [&] {
        if (!config.fca_enabled) {
            filtered = cube;
            return 0;
        }
        const FcaModel model = fca_fit(cube, config.fca_axes);
        if (config.fca_axes > 0) {
            factors = fca_project(model, cube);
            have_factors = true;
            filtered = fca_reconstruct(model, factors);
        } else {
            filtered = fca_reconstruct(model, cube.width(), cube.height());
        }
        // Reconstruction is an approximation; spectra are physically
        // nonnegative, so the filtered image is clamped at zero.
        for (double& v : filtered.data()) v = std::max(v, 0.0);
        if (!config.outputs.fca_model.empty()) save_fca_model(config.outputs.fca_model, model);
        if (!config.outputs.filtered.empty()) write_hyp1(config.outputs.filtered, filtered);
        if (have_factors && !config.outputs.factors.empty()) {
            write_hyp1(config.outputs.factors, factors);
        }
        return 0;
    });

    // Space construction.
    HyperCube space;
    std::optional<PcaModel> pca;
    stage("space", [&] {
        switch (config.space) {
        case PipelineConfig::Space::FilteredImage:
            space = filtered;
            break;
        case PipelineConfig::Space::FcaFactors:
            space = factors;
            break;
        case PipelineConfig::Space::Parameters:
        case PipelineConfig::Space::PcaParameters: {
            HyperCube params =
                build_parameters(config.fit_on_raw ? cube : filtered, config.model);
            if (!config.outputs.parameters.empty()) {
                write_hyp1(config.outputs.parameters, params);
            }
            if (config.space == PipelineConfig::Space::Parameters) {
                space = std::move(params);
            } else {
                pca = pca_fit(params);
                space = pca_project(*pca, params, config.pca_whiten, config.pca_axes);
                if (!config.outputs.pca_model.empty()) {
                    save_pca_model(config.outputs.pca_model, *pca);
                }
            }
            break;
        }
        }
        return 0;
    });

    // Leveling of the space channels.
    stage("leveling", [&] {
        if (!config.leveling_enabled) return 0;
        LevelingSpec spec;
        spec.gaussian_size = config.leveling_gaussian_size;
        spec.se = parse_structuring_element(config.leveling_se);
        spec.max_iters = config.leveling_max_iters;
        spec.tolerance = config.leveling_tolerance;
        space = level_cube(space, spec);
        return 0;
    });
    if (!config.outputs.space.empty()) write_hyp1(config.outputs.space, space);

    // Markers from the spectral classification.
    LabelImage markers;
    stage("markers", [&] {
        markers = extract_markers(space, config.markers.resolve(space));
        if (!config.outputs.markers.empty()) write_label_hyp1(config.outputs.markers, markers);
        if (!config.outputs.markers_png.empty()) {
            write_label_png(config.outputs.markers_png, markers);
        }
        return 0;
    });

    // Scalar relief.
    ScalarImage relief;
    stage("gradient", [&] {
        GradientConfig gcfg = config.gradient;
        if (gcfg.weights_from_inertia) {
            const std::vector<double> ratios = pca->inertia_ratios();
            gcfg.weights.assign(ratios.begin(),
                                ratios.begin() + space.channels());
        }
        relief = gradient(space, gcfg.resolve(space));
        if (!config.outputs.gradient.empty()) write_hyp1(config.outputs.gradient, relief);
        if (!config.outputs.gradient_png.empty()) {
            write_png_gray(config.outputs.gradient_png, relief);
        }
        return 0;
    });

    // Flooding.
    PipelineResult result;
    stage("watershed", [&] {
        result.labels = watershed(relief, markers, config.flood.resolve());
        if (!config.outputs.labels.empty()) write_label_hyp1(config.outputs.labels, result.labels);
        if (!config.outputs.labels_png.empty()) {
            write_label_png(config.outputs.labels_png, result.labels);
        }
        return 0;
    });

    stage("metrics", [&] {
        if (!truth.has_value()) return 0;
        result.metrics = compare_labels(result.labels, *truth);
        if (!config.outputs.metrics.empty()) save_metrics(config.outputs.metrics, *result.metrics);
        return 0;
    });
    return result;
}

} // namespace hyperseg
