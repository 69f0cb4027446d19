// Command-line front end: every pipeline stage runs standalone on HYP1
// intermediates, `run` executes a whole configured pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperseg/errors.hpp"
#include "hyperseg/factor_reduction.hpp"
#include "hyperseg/io.hpp"
#include "hyperseg/pipeline.hpp"

namespace {

using namespace hyperseg;

std::vector<double> parse_weight_list(const std::string& text) {
    std::vector<double> weights;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        try {
            weights.push_back(std::stod(text.substr(pos, next - pos)));
        } catch (const std::exception&) {
            throw ConfigError("bad weight list '" + text + "'");
        }
        pos = next + 1;
    }
    return weights;
}

MarkerSpec::Select parse_select(const std::string& text, int& index) {
    if (text == "smallest") return MarkerSpec::Select::Smallest;
    if (text == "center") return MarkerSpec::Select::Center;
    if (text == "all") return MarkerSpec::Select::All;
    try {
        index = std::stoi(text);
        return MarkerSpec::Select::Index;
    } catch (const std::exception&) {
        throw ConfigError("marker selection must be smallest, center, all or a "
                          "cluster index, got '" + text + "'");
    }
}

struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
};

int cmd_run(const RunArgs& args) {
    std::string text;
    {
        std::ifstream in(args.config, std::ios::binary);
        if (!in) throw ConfigError("cannot open config '" + args.config + "'");
        text.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    if (!args.overrides.empty()) text = apply_config_overrides(text, args.overrides);
    const PipelineConfig config = pipeline_config_from_json_text(text);
    const PipelineResult result = run_pipeline(config);

    std::printf("labels: %d x %d, %d region(s)\n", result.labels.width(),
                result.labels.height(), result.labels.max_label());
    if (result.metrics.has_value()) {
        std::printf("micro F1 vs truth: %.4f  (macro %.4f)\n", result.metrics->micro_f1,
                    result.metrics->macro_f1);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marker-controlled watershed segmentation of hyperspectral cubes"};
    app.require_subcommand(1);

    // run
    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "execute a configured pipeline");
    run->add_option("-c,--config", run_args.config, "pipeline config (JSON)")->required();
    run->add_option("--set", run_args.overrides,
                    "override a config field, e.g. --set markers.stage1.k=4");

    // synth
    std::string synth_config;
    std::string synth_out, synth_truth, synth_truth_png;
    bool synth_demo = false;
    std::uint64_t synth_seed = 7;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic cube + truth");
    synth->add_option("-c,--config", synth_config, "scene description (JSON)");
    synth->add_flag("--demo", synth_demo, "built-in lid-with-blobs demo scene");
    synth->add_option("--seed", synth_seed, "seed for the demo scene");
    synth->add_option("-o,--out", synth_out, "output cube (HYP1)")->required();
    synth->add_option("--truth", synth_truth, "ground-truth labels (HYP1 u16)");
    synth->add_option("--truth-png", synth_truth_png, "ground-truth palette PNG");

    // filter
    std::string filter_in, filter_out, filter_factors, filter_model;
    int filter_axes = 2;
    double filter_epsilon = 0.0;
    CLI::App* filter = app.add_subcommand("filter", "FCA denoising: project + reconstruct");
    filter->add_option("-i,--in", filter_in, "input cube (HYP1)")->required();
    filter->add_option("-o,--out", filter_out, "filtered cube (HYP1)")->required();
    filter->add_option("-k,--axes", filter_axes, "retained factorial axes");
    filter->add_option("--factors", filter_factors, "also write the pixel factors (HYP1)");
    filter->add_option("--model", filter_model, "also write the fitted model (JSON)");
    filter->add_option("--epsilon", filter_epsilon, "offset added to every value first");

    // reduce
    std::string reduce_in, reduce_out, reduce_mode = "parameters";
    int reduce_axes = 2, reduce_transitory = 10, reduce_pca_axes = 0;
    bool reduce_whiten = false;
    CLI::App* reduce = app.add_subcommand("reduce", "build a reduced space from a cube");
    reduce->add_option("-i,--in", reduce_in, "input cube (HYP1)")->required();
    reduce->add_option("-o,--out", reduce_out, "output space (HYP1)")->required();
    reduce->add_option("-m,--mode", reduce_mode, "factors | parameters | pca_parameters")
        ->check(CLI::IsMember({"factors", "parameters", "pca_parameters"}));
    reduce->add_option("-k,--axes", reduce_axes, "FCA axes (mode factors)");
    reduce->add_option("-t,--transitory", reduce_transitory, "transitory channel count");
    reduce->add_option("--pca-axes", reduce_pca_axes, "kept PCA axes (0 = all)");
    reduce->add_flag("--whiten", reduce_whiten, "whiten the PCA factors");

    // markers
    std::string markers_in, markers_out, markers_png, markers_distance = "euclidean";
    std::string markers_select = "smallest", markers_background = "eroded_complement";
    std::string markers_connectivity = "square8";
    int markers_k = 3, markers_samples = 5, markers_sample_size = 0;
    int markers_stage2_k = 0, markers_opening = 5, markers_background_radius = -1;
    std::uint64_t markers_seed = 42;
    CLI::App* markers = app.add_subcommand("markers", "cluster a space into marker seeds");
    markers->add_option("-i,--in", markers_in, "input space (HYP1)")->required();
    markers->add_option("-o,--out", markers_out, "marker labels (HYP1 u16)")->required();
    markers->add_option("--png", markers_png, "marker palette PNG");
    markers->add_option("-k", markers_k, "stage-1 cluster count");
    markers->add_option("--samples", markers_samples, "CLARA sample count");
    markers->add_option("--sample-size", markers_sample_size, "CLARA sample size (0 = auto)");
    markers->add_option("--seed", markers_seed, "sampling seed");
    markers->add_option("--distance", markers_distance,
                        "euclidean | mahalanobis | mahalanobis_diag | chi_squared");
    markers->add_option("--select", markers_select, "smallest | center | all | index");
    markers->add_option("--stage2-k", markers_stage2_k, "second-stage cluster count (0 = off)");
    markers->add_option("--opening", markers_opening, "disk radius regularizing each mask");
    markers->add_option("--background", markers_background, "eroded_complement | none");
    markers->add_option("--background-radius", markers_background_radius,
                        "background erosion radius (-1 = opening radius)");
    markers->add_option("--connectivity", markers_connectivity, "component connectivity");

    // gradient
    std::string gradient_in, gradient_out, gradient_png, gradient_kind = "metric";
    std::string gradient_distance = "euclidean", gradient_se = "square8", gradient_weights;
    int gradient_channel = 0;
    CLI::App* grad = app.add_subcommand("gradient", "build the scalar relief of a space");
    grad->add_option("-i,--in", gradient_in, "input space (HYP1)")->required();
    grad->add_option("-o,--out", gradient_out, "gradient (HYP1 f32, raw)")->required();
    grad->add_option("--png", gradient_png, "display-rescaled PNG");
    grad->add_option("--kind", gradient_kind, "marginal | supremum | weighted_sum | metric")
        ->check(CLI::IsMember({"marginal", "supremum", "weighted_sum", "metric"}));
    grad->add_option("--distance", gradient_distance, "metric gradient distance");
    grad->add_option("--se", gradient_se, "structuring element (cross4|square8|disk:R)");
    grad->add_option("--channel", gradient_channel, "channel for the marginal gradient");
    grad->add_option("--weights", gradient_weights, "comma-separated channel weights");

    // watershed
    std::string ws_gradient, ws_markers, ws_out, ws_png, ws_connectivity = "square8";
    int ws_levels = 256;
    bool ws_lines = false;
    CLI::App* ws = app.add_subcommand("watershed", "flood a gradient from markers");
    ws->add_option("-g,--gradient", ws_gradient, "gradient (HYP1, values in [0,1])")->required();
    ws->add_option("-m,--markers", ws_markers, "marker labels (HYP1 u16)")->required();
    ws->add_option("-o,--out", ws_out, "label map (HYP1 u16)")->required();
    ws->add_option("--png", ws_png, "label palette PNG");
    ws->add_option("--levels", ws_levels, "gradient quantization levels");
    ws->add_option("--connectivity", ws_connectivity, "flooding connectivity");
    ws->add_flag("--lines", ws_lines, "keep watershed line pixels at label 0");

    // eval
    std::string eval_labels, eval_truth, eval_out;
    CLI::App* eval = app.add_subcommand("eval", "score labels against a reference");
    eval->add_option("-l,--labels", eval_labels, "predicted labels (HYP1 u16)")->required();
    eval->add_option("-t,--truth", eval_truth, "reference labels (HYP1 u16)")->required();
    eval->add_option("-o,--out", eval_out, "metrics report (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);

        if (synth->parsed()) {
            SyntheticSpec spec;
            if (synth_demo) {
                spec.width = 128;
                spec.height = 128;
                spec.channels = 30;
                spec.transitory_channels = 10;
                spec.seed = synth_seed;
                spec.background_slope = 0.0;
                spec.background_intercept = 0.15;
                spec.background_rise = 0.0;
                spec.regions = {
                    {SyntheticRegion::Shape::Disk, 64, 64, 52, 0, 0, 0, 0, -0.004, 0.9, 0.35},
                    {SyntheticRegion::Shape::Disk, 50, 48, 9, 0, 0, 0, 0, -0.011, 1.25, 0.8},
                    {SyntheticRegion::Shape::Disk, 82, 70, 7, 0, 0, 0, 0, -0.011, 1.25, 0.8},
                    {SyntheticRegion::Shape::Disk, 58, 86, 6, 0, 0, 0, 0, -0.011, 1.25, 0.8},
                };
                spec.noise_sigma = 0.0175;
            } else if (!synth_config.empty()) {
                spec = synthetic_spec_from_json_file(synth_config);
            } else {
                throw ConfigError("synth: give --config or --demo");
            }
            const SyntheticResult result = generate_synthetic(spec);
            write_hyp1(synth_out, result.cube);
            if (!synth_truth.empty()) write_label_hyp1(synth_truth, result.truth);
            if (!synth_truth_png.empty()) write_label_png(synth_truth_png, result.truth);
            std::printf("wrote %dx%dx%d cube to %s\n", result.cube.width(),
                        result.cube.height(), result.cube.channels(), synth_out.c_str());
            return 0;
        }

        if (filter->parsed()) {
            HyperCube cube = read_hyp1(filter_in);
            if (filter_epsilon > 0.0) {
                for (double& v : cube.data()) v += filter_epsilon;
            }
            const FcaModel model = fca_fit(cube, filter_axes);
            const HyperCube factors = fca_project(model, cube);
            HyperCube filtered = fca_reconstruct(model, factors);
            for (double& v : filtered.data()) v = std::max(v, 0.0);
            write_hyp1(filter_out, filtered);
            if (!filter_factors.empty()) write_hyp1(filter_factors, factors);
            if (!filter_model.empty()) save_fca_model(filter_model, model);
            std::printf("kept %d axes; inertia share %.4f\n", filter_axes,
                        model.total_inertia() > 0.0
                            ? [&] {
                                  double kept = 0.0;
                                  for (int k = 0; k < filter_axes; ++k)
                                      kept += model.eigenvalues[static_cast<std::size_t>(k)];
                                  return kept / model.total_inertia();
                              }()
                            : 0.0);
            return 0;
        }

        if (reduce->parsed()) {
            const HyperCube cube = read_hyp1(reduce_in);
            if (reduce_mode == "factors") {
                const FcaModel model = fca_fit(cube, reduce_axes);
                write_hyp1(reduce_out, fca_project(model, cube));
            } else {
                ModelSpec mspec;
                mspec.transitory_channels = reduce_transitory;
                const HyperCube params = build_parameters(cube, mspec);
                if (reduce_mode == "parameters") {
                    write_hyp1(reduce_out, params);
                } else {
                    const PcaModel pca = pca_fit(params);
                    write_hyp1(reduce_out,
                               pca_project(pca, params, reduce_whiten, reduce_pca_axes));
                }
            }
            return 0;
        }

        if (markers->parsed()) {
            const HyperCube space = read_hyp1(markers_in);
            MarkerSpec spec;
            spec.stage1.k = markers_k;
            spec.stage1.samples = markers_samples;
            spec.stage1.sample_size = markers_sample_size;
            spec.stage1.rng_seed = markers_seed;
            spec.stage1.distance = resolve_distance(parse_distance_name(markers_distance), space);
            spec.select = parse_select(markers_select, spec.select_index);
            if (markers_stage2_k > 0) {
                ClusteringSpec stage2 = spec.stage1;
                stage2.k = markers_stage2_k;
                spec.stage2 = stage2;
            }
            spec.opening_radius = markers_opening;
            spec.background = markers_background == "none"
                                  ? MarkerSpec::Background::None
                                  : MarkerSpec::Background::ErodedComplement;
            spec.background_radius = markers_background_radius;
            spec.connectivity = parse_structuring_element(markers_connectivity);
            const LabelImage seeds = extract_markers(space, spec);
            write_label_hyp1(markers_out, seeds);
            if (!markers_png.empty()) write_label_png(markers_png, seeds);
            std::printf("%d marker label(s)\n", seeds.max_label());
            return 0;
        }

        if (grad->parsed()) {
            const HyperCube space = read_hyp1(gradient_in);
            GradientSpec spec;
            spec.se = parse_structuring_element(gradient_se);
            spec.channel = gradient_channel;
            if (gradient_kind == "marginal") spec.kind = GradientSpec::Kind::Marginal;
            else if (gradient_kind == "supremum") spec.kind = GradientSpec::Kind::Supremum;
            else if (gradient_kind == "weighted_sum") spec.kind = GradientSpec::Kind::WeightedSum;
            else spec.kind = GradientSpec::Kind::Metric;
            if (spec.kind == GradientSpec::Kind::WeightedSum) {
                spec.weights = parse_weight_list(gradient_weights);
            }
            if (spec.kind == GradientSpec::Kind::Metric) {
                spec.distance = resolve_distance(parse_distance_name(gradient_distance), space);
            }
            const ScalarImage relief = gradient(space, spec);
            write_hyp1(gradient_out, relief);
            if (!gradient_png.empty()) write_png_gray(gradient_png, relief);
            return 0;
        }

        if (ws->parsed()) {
            const ScalarImage relief = read_hyp1_scalar(ws_gradient);
            const LabelImage seeds = read_label_hyp1(ws_markers);
            FloodSpec spec;
            spec.levels = ws_levels;
            spec.connectivity = parse_structuring_element(ws_connectivity);
            spec.emit_lines = ws_lines;
            const LabelImage labels = watershed(relief, seeds, spec);
            write_label_hyp1(ws_out, labels);
            if (!ws_png.empty()) write_label_png(ws_png, labels);
            std::printf("%d region(s)\n", labels.max_label());
            return 0;
        }

        if (eval->parsed()) {
            const LabelImage labels = read_label_hyp1(eval_labels);
            const LabelImage truth = read_label_hyp1(eval_truth);
            const SegmentationMetrics metrics = compare_labels(labels, truth);
            if (!eval_out.empty()) save_metrics(eval_out, metrics);
            std::printf("micro F1 %.4f  macro F1 %.4f  (%zu truth class(es))\n",
                        metrics.micro_f1, metrics.macro_f1, metrics.classes.size());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
