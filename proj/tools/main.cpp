#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "splatgrad/clouds.hpp"
#include "splatgrad/errors.hpp"
#include "splatgrad/fit.hpp"
#include "splatgrad/gradcheck.hpp"
#include "splatgrad/io.hpp"
#include "splatgrad/losses.hpp"

namespace sg = splatgrad;

namespace {

struct Common {
    std::string config_path;

    sg::RunConfig load() const {
        if (config_path.empty()) return sg::RunConfig{};
        return sg::load_run_config(config_path);
    }
};

sg::ImageGrid render_view(const sg::PointCloud& cloud, double azimuth, double elevation,
                          const sg::RunConfig& cfg) {
    const sg::ViewSpec view{azimuth, elevation, cfg.distance};
    const sg::PipelineConfig pipe = cfg.pipeline();
    return sg::splat(sg::project(cloud, view, pipe.intrinsics), pipe.splat);
}

int cmd_project(const std::string& cloud_path, double azimuth, double elevation,
                const std::string& out, const std::string& raw, bool clamp_display,
                bool normalize_cloud_first, const Common& common) {
    const sg::RunConfig cfg = common.load();
    sg::PointCloud cloud = sg::read_cloud(cloud_path);
    if (normalize_cloud_first) cloud = sg::normalize_cloud(cloud);
    const sg::ImageGrid img = render_view(cloud, azimuth, elevation, cfg);
    sg::write_image_pgm(img, out, !clamp_display);
    if (!raw.empty()) sg::write_image_text(img, raw);
    std::printf("projected %zu points -> %s\n", cloud.size(), out.c_str());
    return 0;
}

int cmd_maps(const std::string& cloud_path, double azimuth, double elevation,
             const std::string& out_edge, const std::string& out_corner,
             const std::string& raw_edge, const std::string& raw_corner,
             bool normalize_cloud_first, const Common& common) {
    const sg::RunConfig cfg = common.load();
    sg::PointCloud cloud = sg::read_cloud(cloud_path);
    if (normalize_cloud_first) cloud = sg::normalize_cloud(cloud);
    const sg::ImageGrid img = render_view(cloud, azimuth, elevation, cfg);
    const sg::EdgeCornerMaps maps = sg::visual_maps(img, cfg.pipeline().visual);
    sg::write_image_pgm(maps.edge, out_edge, true);
    sg::write_image_pgm(maps.corner, out_corner, true);
    if (!raw_edge.empty()) sg::write_image_text(maps.edge, raw_edge);
    if (!raw_corner.empty()) sg::write_image_text(maps.corner, raw_corner);
    std::printf("wrote %s and %s\n", out_edge.c_str(), out_corner.c_str());
    return 0;
}

int cmd_sobel(const std::string& image_path, const std::string& out, double threshold,
              const std::string& raw) {
    const sg::ImageGrid img = sg::read_image_pgm(image_path);
    const sg::ImageGrid edges = sg::sobel_edges(img, threshold);
    sg::write_image_pgm(edges, out, true);
    if (!raw.empty()) sg::write_image_text(edges, raw);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_fit(const std::string& initial_path, const std::string& target_path,
            const std::string& out, const std::string& trace_path,
            const std::string& snapshot_dir, const Common& common) {
    sg::RunConfig cfg = common.load();
    const sg::PointCloud initial = sg::normalize_cloud(sg::read_cloud(initial_path));
    const sg::PointCloud target = sg::normalize_cloud(sg::read_cloud(target_path));

    const sg::FitConfig fit_cfg = cfg.fit_config();
    const sg::FitResult result =
        sg::fit(initial, target, cfg.angle_pool, fit_cfg, cfg.pipeline());

    sg::write_cloud(result.cloud, out);
    if (!trace_path.empty()) sg::write_trace(result.trace, trace_path);
    if (!snapshot_dir.empty()) {
        std::filesystem::create_directories(snapshot_dir);
        for (const sg::Snapshot& snap : result.trace.snapshots) {
            char name[64];
            std::snprintf(name, sizeof(name), "cloud_step_%06d.txt", snap.step);
            sg::write_cloud(snap.cloud, (std::filesystem::path(snapshot_dir) / name).string());
        }
    }
    const sg::LossReport& first = result.trace.history.front();
    const sg::LossReport& last = result.trace.history.back();
    std::printf("steps %zu  cd %s -> %s  total %s -> %s\n", result.trace.history.size(),
                sg::format_double(first.cd).c_str(), sg::format_double(last.cd).c_str(),
                sg::format_double(first.total).c_str(), sg::format_double(last.total).c_str());
    return 0;
}

int cmd_metrics(const std::string& pred_path, const std::string& gt_path,
                const std::string& name) {
    const sg::PointCloud pred = sg::normalize_cloud(sg::read_cloud(pred_path));
    const sg::PointCloud gt = sg::normalize_cloud(sg::read_cloud(gt_path));
    const sg::EvalMetrics m = sg::eval_metrics(pred, gt);
    if (name.empty()) {
        std::printf("%.2f %.2f\n", m.cd_x100, m.emd_x100);
    } else {
        std::printf("%s, %.2f, %.2f\n", name.c_str(), m.cd_x100, m.emd_x100);
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, int instances) {
    sg::GradcheckOptions opts;
    opts.seed = seed;
    opts.instances = instances;
    const sg::GradcheckReport report = sg::run_gradcheck(opts);
    std::fputs(report.text.c_str(), stdout);
    return report.all_passed ? 0 : 1;
}

int cmd_sweep_sigma(const std::string& values_csv, const std::string& cloud_path,
                    const std::string& out_dir, double azimuth, double elevation,
                    const Common& common) {
    const sg::RunConfig cfg = common.load();
    sg::PointCloud cloud =
        cloud_path.empty() ? sg::ring_cloud(24, 0.1) : sg::read_cloud(cloud_path);

    std::vector<double> values;
    {
        std::string cur;
        for (char ch : values_csv + ",") {
            if (ch == ',') {
                if (!cur.empty()) values.push_back(std::stod(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
    }
    if (values.empty()) throw sg::ParameterError("sweep-sigma: no sigma2 values given");

    std::filesystem::create_directories(out_dir);
    const sg::PipelineConfig pipe = cfg.pipeline();
    const sg::ViewSpec view{azimuth, elevation, cfg.distance};
    const sg::PixelCoords pc = sg::project(cloud, view, pipe.intrinsics);

    std::vector<sg::ImageGrid> panels;
    for (double s2 : values) {
        sg::SplatConfig scfg = pipe.splat;
        scfg.sigma2 = s2;
        scfg.truncation_radius = 0.0;  // auto, scales with sigma
        const sg::ImageGrid img = sg::splat(pc, scfg);
        const int components = sg::count_components_above(img, 0.5);
        const std::string stem = "sweep_sigma2_" + sg::format_double(s2);
        const auto base = std::filesystem::path(out_dir) / stem;
        sg::write_image_pgm(img, base.string() + ".pgm", true);
        sg::write_image_text(img, base.string() + ".txt");
        std::printf("sigma2=%s components=%d\n", sg::format_double(s2).c_str(), components);
        panels.push_back(img);
    }

    // side-by-side strip, one panel per sigma, each display-normalized
    const int h = pipe.splat.height;
    const int w = pipe.splat.width;
    sg::ImageGrid strip(h, w * static_cast<int>(panels.size()));
    for (std::size_t p = 0; p < panels.size(); ++p) {
        double mx = 0.0;
        for (double v : panels[p].data) mx = std::max(mx, v);
        const double scale = mx > 0.0 ? 255.0 / mx : 0.0;
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                strip.at(r, static_cast<int>(p) * w + c) = panels[p].at(r, c) * scale;
            }
        }
    }
    const std::string strip_path = (std::filesystem::path(out_dir) / "sweep_strip.pgm").string();
    sg::write_image_pgm(strip, strip_path, false);
    std::printf("strip -> %s\n", strip_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentiable point-cloud projection, visual losses and fitting"};
    app.require_subcommand(1);

    Common common;
    app.add_option("--config", common.config_path, "run configuration file")
        ->configurable(false);

    // project
    auto* project = app.add_subcommand("project", "render a cloud to a projected image");
    std::string p_cloud, p_out, p_raw;
    double p_az = 0.0, p_el = 0.0;
    bool p_clamp = false, p_norm = false;
    project->add_option("--cloud", p_cloud, "input point cloud")->required();
    project->add_option("--azimuth", p_az, "azimuth in degrees");
    project->add_option("--elevation", p_el, "elevation in degrees");
    project->add_option("--out", p_out, "output graymap (P5)")->required();
    project->add_option("--raw", p_raw, "also write the exact float grid as text");
    project->add_flag("--clamp-display", p_clamp, "clamp to [0,255] instead of normalizing");
    project->add_flag("--normalize-cloud", p_norm, "unit-cube normalize the cloud first");

    // maps
    auto* maps = app.add_subcommand("maps", "render edge and corner maps of a cloud");
    std::string m_cloud, m_edge, m_corner, m_raw_edge, m_raw_corner;
    double m_az = 0.0, m_el = 0.0;
    bool m_norm = false;
    maps->add_option("--cloud", m_cloud, "input point cloud")->required();
    maps->add_option("--azimuth", m_az, "azimuth in degrees");
    maps->add_option("--elevation", m_el, "elevation in degrees");
    maps->add_option("--out-edge", m_edge, "edge map graymap")->required();
    maps->add_option("--out-corner", m_corner, "corner map graymap")->required();
    maps->add_option("--raw-edge", m_raw_edge, "exact edge map as text");
    maps->add_option("--raw-corner", m_raw_corner, "exact corner map as text");
    maps->add_flag("--normalize-cloud", m_norm, "unit-cube normalize the cloud first");

    // sobel
    auto* sobel = app.add_subcommand("sobel", "binarize an image and extract Sobel edges");
    std::string s_image, s_out, s_raw;
    double s_threshold = 0.5;
    sobel->add_option("--image", s_image, "input graymap (P5)")->required();
    sobel->add_option("--out", s_out, "output graymap")->required();
    sobel->add_option("--threshold", s_threshold, "binarization threshold in [0,1]");
    sobel->add_option("--raw", s_raw, "exact edge grid as text");

    // fit
    auto* fitcmd = app.add_subcommand("fit", "optimize a cloud toward a target's views");
    std::string f_initial, f_target, f_out, f_trace, f_snapshots;
    fitcmd->add_option("--initial", f_initial, "initial point cloud")->required();
    fitcmd->add_option("--target", f_target, "target point cloud")->required();
    fitcmd->add_option("--out", f_out, "fitted cloud output")->required();
    fitcmd->add_option("--trace", f_trace, "per-step loss records");
    fitcmd->add_option("--snapshot-dir", f_snapshots, "directory for cloud snapshots");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "ICP-aligned CD and EMD, scaled by 100");
    std::string e_pred, e_gt, e_name;
    metrics->add_option("--pred", e_pred, "predicted cloud")->required();
    metrics->add_option("--gt", e_gt, "ground-truth cloud")->required();
    metrics->add_option("--name", e_name, "emit a named table row");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference audit of every pullback");
    std::uint64_t g_seed = 0;
    int g_instances = 20;
    gc->add_option("--seed", g_seed, "audit seed");
    gc->add_option("--instances", g_instances, "instances per pullback")
        ->check(CLI::PositiveNumber);

    // sweep-sigma
    auto* sweep = app.add_subcommand("sweep-sigma", "splat the same cloud at several sigma2");
    std::string w_values = "0.1,0.5,1,2", w_cloud, w_dir = ".";
    double w_az = 0.0, w_el = 0.0;
    sweep->add_option("--values", w_values, "comma-separated sigma2 values");
    sweep->add_option("--cloud", w_cloud, "cloud to splat (default: built-in 24-point ring)");
    sweep->add_option("--out-dir", w_dir, "output directory");
    sweep->add_option("--azimuth", w_az, "azimuth in degrees");
    sweep->add_option("--elevation", w_el, "elevation in degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (project->parsed()) {
            return cmd_project(p_cloud, p_az, p_el, p_out, p_raw, p_clamp, p_norm, common);
        }
        if (maps->parsed()) {
            return cmd_maps(m_cloud, m_az, m_el, m_edge, m_corner, m_raw_edge, m_raw_corner,
                            m_norm, common);
        }
        if (sobel->parsed()) {
            return cmd_sobel(s_image, s_out, s_threshold, s_raw);
        }
        if (fitcmd->parsed()) {
            return cmd_fit(f_initial, f_target, f_out, f_trace, f_snapshots, common);
        }
        if (metrics->parsed()) {
            return cmd_metrics(e_pred, e_gt, e_name);
        }
        if (gc->parsed()) {
            return cmd_gradcheck(g_seed, g_instances);
        }
        if (sweep->parsed()) {
            return cmd_sweep_sigma(w_values, w_cloud, w_dir, w_az, w_el, common);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
