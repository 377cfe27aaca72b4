#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatgrad/fit.hpp"
#include "splatgrad/losses.hpp"

namespace splatgrad {

/// Flat key-value run configuration. Keys carry units
/// (e.g. splat.sigma2_px2); unknown keys are rejected at parse time and all
/// module invariants are re-validated on load.
struct RunConfig {
    double fx = 120.0;                  // camera.fx_px
    double fy = 120.0;                  // camera.fy_px
    double cx = -32.0;                  // camera.cx_px
    double cy = -32.0;                  // camera.cy_px
    double distance = 2.5;              // camera.distance_units
    std::vector<ViewSpec> angle_pool;   // camera.angle_pool_deg, "az:el,az:el,..."
    int image_height = 64;              // image.height_px
    int image_width = 64;               // image.width_px
    double splat_sigma2 = 0.5;          // splat.sigma2_px2
    double truncation_radius = 0.0;     // splat.truncation_radius_px ("auto" = 0)
    double kernel_sigma = 1.0;          // kernels.sigma_px
    double harris_eps = 1e-6;           // harris.eps
    double lambda1 = 20.0;              // loss.lambda1
    double lambda2 = 10.0;              // loss.lambda2
    double lambda1_phase2 = 2.0;        // loss.lambda1_phase2
    double lambda2_phase2 = 0.2;        // loss.lambda2_phase2
    double learning_rate = 0.00005;     // fit.learning_rate
    double beta1 = 0.9;                 // fit.beta1
    double beta2 = 0.999;               // fit.beta2
    double adam_eps = 1e-8;             // fit.adam_eps
    int views_per_step = 4;             // fit.views_per_step
    int phase1_steps = 2000;            // fit.phase1_steps
    int phase2_steps = 500;             // fit.phase2_steps
    int snapshot_interval = 0;          // fit.snapshot_interval
    std::uint64_t seed = 0;             // seed
    std::string input_cloud;            // io.input_cloud
    std::string target_cloud;           // io.target_cloud
    std::string output_dir;             // io.output_dir

    RunConfig();  // fills angle_pool with the default 16 views

    bool operator==(const RunConfig& o) const;

    PipelineConfig pipeline() const;
    FitConfig fit_config() const;
    void validate() const;  // throws ParameterError
};

/// Parses config text. ParseError carries the offending line number.
RunConfig parse_run_config(const std::string& text);
/// Round-trip exact: parse(serialize(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

/// Reads either whitespace-delimited "x y z" lines or an ASCII polygon
/// (PLY) file with a vertex element; faces are ignored, order preserved.
PointCloud read_cloud(const std::string& path);
/// Shortest round-trip decimal representation per coordinate.
void write_cloud(const PointCloud& cloud, const std::string& path);

/// Binary 8-bit graymap (P5). normalize maps [min,max] → [0,255]; otherwise
/// values are clamped to [0,255] and rounded.
void write_image_pgm(const ImageGrid& grid, const std::string& path, bool normalize);
/// Reads a P5 graymap, scaled to [0,1].
ImageGrid read_image_pgm(const std::string& path);

/// Whitespace text grid, one row per line, exact decimal values.
void write_image_text(const ImageGrid& grid, const std::string& path);
ImageGrid read_image_text(const std::string& path);

/// Line-delimited fit records: "step cd edge corner total".
void write_trace(const FitTrace& trace, const std::string& path);

/// Shortest decimal string that parses back to exactly this double.
std::string format_double(double v);

}  // namespace splatgrad
