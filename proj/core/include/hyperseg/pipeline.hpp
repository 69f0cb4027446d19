#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hyperseg/clustering.hpp"
#include "hyperseg/gradients.hpp"
#include "hyperseg/metrics.hpp"
#include "hyperseg/model_reduction.hpp"
#include "hyperseg/synthetic.hpp"
#include "hyperseg/watershed.hpp"

namespace hyperseg {

/// Distance selected by name in a config; resolved against the cube it will
/// run on (covariance / channel sums are estimated from that cube).
enum class DistanceName { Euclidean, Mahalanobis, MahalanobisDiagonal, ChiSquared };

DistanceKind resolve_distance(DistanceName name, const HyperCube& cube);
DistanceName parse_distance_name(const std::string& text);

/// "cross4", "square8" or "disk:R".
StructuringElement parse_structuring_element(const std::string& text);

struct ClusterStageConfig {
    int k = 3;
    int samples = 5;
    int sample_size = 0;
    std::uint64_t seed = 42;
    DistanceName distance = DistanceName::Euclidean;

    ClusteringSpec resolve(const HyperCube& space) const;
};

struct MarkersConfig {
    ClusterStageConfig stage1;
    MarkerSpec::Select select = MarkerSpec::Select::Smallest;
    int select_index = 0;
    std::optional<ClusterStageConfig> stage2;
    int opening_radius = 5;
    MarkerSpec::Background background = MarkerSpec::Background::ErodedComplement;
    int background_radius = -1;
    std::string connectivity = "square8";

    MarkerSpec resolve(const HyperCube& space) const;
};

struct GradientConfig {
    GradientSpec::Kind kind = GradientSpec::Kind::Metric;
    std::string se = "square8";
    int channel = 0;
    std::vector<double> weights;    ///< for WeightedSum
    bool weights_from_inertia = false;    ///< take weights from PCA inertia ratios
    DistanceName distance = DistanceName::Euclidean;

    GradientSpec resolve(const HyperCube& space) const;
};

struct FloodConfig {
    int levels = 256;
    std::string connectivity = "square8";
    bool emit_lines = false;

    FloodSpec resolve() const;
};

struct OutputsConfig {
    std::filesystem::path labels;          ///< u16 HYP1 label map
    std::filesystem::path labels_png;      ///< fixed-palette PNG
    std::filesystem::path gradient;        ///< raw f32 HYP1, never rescaled
    std::filesystem::path gradient_png;    ///< display-rescaled
    std::filesystem::path markers;
    std::filesystem::path markers_png;
    std::filesystem::path space;
    std::filesystem::path filtered;
    std::filesystem::path factors;
    std::filesystem::path parameters;
    std::filesystem::path fca_model;
    std::filesystem::path pca_model;
    std::filesystem::path metrics;
    std::filesystem::path truth;           ///< where a synthetic truth is written
};

/// Declarative description of one segmentation run: which space is built
/// from the input cube and how it is leveled, clustered, turned into a
/// relief and flooded.
struct PipelineConfig {
    enum class Space { FilteredImage, FcaFactors, Parameters, PcaParameters };

    std::filesystem::path input_cube;             ///< HYP1 input
    std::filesystem::path input_stack;            ///< directory of PNG/PGM channels
    std::optional<SyntheticSpec> synthetic;       ///< generated input
    std::filesystem::path truth;                  ///< reference labels for metrics

    bool fca_enabled = true;
    int fca_axes = 2;
    double epsilon_offset = 0.0;    ///< added to every value before FCA

    Space space = Space::FilteredImage;
    ModelSpec model;
    bool fit_on_raw = false;        ///< fit the model on the unfiltered cube
    int pca_axes = 0;               ///< 0 = all
    bool pca_whiten = false;

    bool leveling_enabled = true;
    int leveling_gaussian_size = 11;
    std::string leveling_se = "cross4";
    int leveling_max_iters = 0;
    double leveling_tolerance = 1e-9;

    MarkersConfig markers;
    GradientConfig gradient;
    FloodConfig flood;
    OutputsConfig outputs;

    /// Cross-field checks that do not need the data (space/gradient
    /// compatibility, required inputs).
    void validate() const;
};

PipelineConfig pipeline_config_from_json_text(const std::string& text);
PipelineConfig pipeline_config_from_json_file(const std::filesystem::path& path);

SyntheticSpec synthetic_spec_from_json_text(const std::string& text);
SyntheticSpec synthetic_spec_from_json_file(const std::filesystem::path& path);

/// Apply `key=value` overrides (dotted keys, JSON-literal values) to a JSON
/// config text; returns the new text.
std::string apply_config_overrides(const std::string& json_text,
                                   const std::vector<std::string>& overrides);

struct PipelineResult {
    LabelImage labels;
    std::optional<SegmentationMetrics> metrics;
};

/// Execute filter, space construction, leveling, markers, gradient and
/// watershed per the config, writing every requested artifact. Errors carry
/// the failing stage's name.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace hyperseg
