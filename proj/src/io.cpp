#include "splatgrad/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "splatgrad/errors.hpp"

namespace splatgrad {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double_token(const std::string& tok, std::size_t line) {
    const std::string t = trim(tok);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || t.empty()) {
        throw ParseError("expected a number, got '" + t + "' (line " + std::to_string(line) + ")",
                         line);
    }
    return v;
}

long long parse_int_token(const std::string& tok, std::size_t line) {
    const std::string t = trim(tok);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
        throw ParseError("expected an integer, got '" + t + "' (line " + std::to_string(line) + ")",
                         line);
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string pool_to_string(const std::vector<ViewSpec>& pool) {
    std::string out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i) out += ',';
        out += format_double(pool[i].azimuth_deg) + ":" + format_double(pool[i].elevation_deg);
    }
    return out;
}

std::vector<ViewSpec> pool_from_string(const std::string& s, double distance, std::size_t line) {
    std::vector<ViewSpec> pool;
    for (const std::string& entry : split(s, ',')) {
        const auto parts = split(trim(entry), ':');
        if (parts.size() != 2) {
            throw ParseError("angle pool entries must be 'azimuth:elevation' (line " +
                                 std::to_string(line) + ")",
                             line);
        }
        pool.push_back(ViewSpec{parse_double_token(parts[0], line),
                                parse_double_token(parts[1], line), distance});
    }
    return pool;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

RunConfig::RunConfig() { angle_pool = default_angle_pool(distance); }

bool RunConfig::operator==(const RunConfig& o) const {
    auto pool_eq = [&] {
        if (angle_pool.size() != o.angle_pool.size()) return false;
        for (std::size_t i = 0; i < angle_pool.size(); ++i) {
            if (angle_pool[i].azimuth_deg != o.angle_pool[i].azimuth_deg ||
                angle_pool[i].elevation_deg != o.angle_pool[i].elevation_deg ||
                angle_pool[i].distance != o.angle_pool[i].distance)
                return false;
        }
        return true;
    };
    return fx == o.fx && fy == o.fy && cx == o.cx && cy == o.cy && distance == o.distance &&
           image_height == o.image_height && image_width == o.image_width &&
           splat_sigma2 == o.splat_sigma2 && truncation_radius == o.truncation_radius &&
           kernel_sigma == o.kernel_sigma && harris_eps == o.harris_eps && lambda1 == o.lambda1 &&
           lambda2 == o.lambda2 && lambda1_phase2 == o.lambda1_phase2 &&
           lambda2_phase2 == o.lambda2_phase2 && learning_rate == o.learning_rate &&
           beta1 == o.beta1 && beta2 == o.beta2 && adam_eps == o.adam_eps &&
           views_per_step == o.views_per_step && phase1_steps == o.phase1_steps &&
           phase2_steps == o.phase2_steps && snapshot_interval == o.snapshot_interval &&
           seed == o.seed && input_cloud == o.input_cloud && target_cloud == o.target_cloud &&
           output_dir == o.output_dir && pool_eq();
}

PipelineConfig RunConfig::pipeline() const {
    PipelineConfig p;
    p.intrinsics = CameraIntrinsics{fx, fy, cx, cy};
    p.splat = SplatConfig{splat_sigma2, image_height, image_width, truncation_radius};
    p.visual = VisualConfig{kernel_sigma, harris_eps};
    return p;
}

FitConfig RunConfig::fit_config() const {
    FitConfig f;
    f.learning_rate = learning_rate;
    f.beta1 = beta1;
    f.beta2 = beta2;
    f.adam_eps = adam_eps;
    f.views_per_step = views_per_step;
    f.phase1_steps = phase1_steps;
    f.phase2_steps = phase2_steps;
    f.weights_phase1 = LossWeights{lambda1, lambda2};
    f.weights_phase2 = LossWeights{lambda1_phase2, lambda2_phase2};
    f.seed = seed;
    f.snapshot_interval = snapshot_interval;
    return f;
}

void RunConfig::validate() const {
    if (fx == 0.0 || fy == 0.0) throw ParameterError("config: fx and fy must be nonzero");
    if (!(distance > 0.0)) throw ParameterError("config: camera distance must be positive");
    if (image_height < 3 || image_width < 3) {
        throw ParameterError("config: image must be at least 3x3");
    }
    if (!(kernel_sigma > 0.0)) throw ParameterError("config: kernels.sigma_px must be positive");
    if (!(harris_eps > 0.0)) throw ParameterError("config: harris.eps must be positive");
    if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1_phase2 >= 0.0 && lambda2_phase2 >= 0.0) ||
        !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
        throw ParameterError("config: loss weights must be finite and non-negative");
    }
    if (angle_pool.empty()) throw ParameterError("config: angle pool must be nonempty");
    if (static_cast<std::size_t>(views_per_step) > angle_pool.size()) {
        throw ParameterError("config: fit.views_per_step exceeds the angle pool size");
    }
    pipeline().splat.validate();  // sigma2 / truncation coupling
    fit_config().validate();
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    bool pool_set = false;
    std::string pool_text;
    std::size_t pool_line = 0;

    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    std::map<std::string, std::function<void(const std::string&, std::size_t)>> setters;
    auto dbl = [&](double& slot) {
        return [&slot](const std::string& v, std::size_t ln) { slot = parse_double_token(v, ln); };
    };
    auto integer = [&](int& slot) {
        return [&slot](const std::string& v, std::size_t ln) {
            slot = static_cast<int>(parse_int_token(v, ln));
        };
    };
    auto str = [&](std::string& slot) {
        return [&slot](const std::string& v, std::size_t) { slot = v; };
    };
    setters["camera.fx_px"] = dbl(cfg.fx);
    setters["camera.fy_px"] = dbl(cfg.fy);
    setters["camera.cx_px"] = dbl(cfg.cx);
    setters["camera.cy_px"] = dbl(cfg.cy);
    setters["camera.distance_units"] = dbl(cfg.distance);
    setters["camera.angle_pool_deg"] = [&](const std::string& v, std::size_t ln) {
        pool_set = true;
        pool_text = v;
        pool_line = ln;
    };
    setters["image.height_px"] = integer(cfg.image_height);
    setters["image.width_px"] = integer(cfg.image_width);
    setters["splat.sigma2_px2"] = dbl(cfg.splat_sigma2);
    setters["splat.truncation_radius_px"] = [&](const std::string& v, std::size_t ln) {
        if (trim(v) == "auto") {
            cfg.truncation_radius = 0.0;
        } else {
            cfg.truncation_radius = parse_double_token(v, ln);
        }
    };
    setters["kernels.sigma_px"] = dbl(cfg.kernel_sigma);
    setters["harris.eps"] = dbl(cfg.harris_eps);
    setters["loss.lambda1"] = dbl(cfg.lambda1);
    setters["loss.lambda2"] = dbl(cfg.lambda2);
    setters["loss.lambda1_phase2"] = dbl(cfg.lambda1_phase2);
    setters["loss.lambda2_phase2"] = dbl(cfg.lambda2_phase2);
    setters["fit.learning_rate"] = dbl(cfg.learning_rate);
    setters["fit.beta1"] = dbl(cfg.beta1);
    setters["fit.beta2"] = dbl(cfg.beta2);
    setters["fit.adam_eps"] = dbl(cfg.adam_eps);
    setters["fit.views_per_step"] = integer(cfg.views_per_step);
    setters["fit.phase1_steps"] = integer(cfg.phase1_steps);
    setters["fit.phase2_steps"] = integer(cfg.phase2_steps);
    setters["fit.snapshot_interval"] = integer(cfg.snapshot_interval);
    setters["seed"] = [&](const std::string& v, std::size_t ln) {
        cfg.seed = static_cast<std::uint64_t>(parse_int_token(v, ln));
    };
    setters["io.input_cloud"] = str(cfg.input_cloud);
    setters["io.target_cloud"] = str(cfg.target_cloud);
    setters["io.output_dir"] = str(cfg.output_dir);

    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value' (line " + std::to_string(lineno) + ")",
                             lineno);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ParseError("unknown key '" + key + "' (line " + std::to_string(lineno) + ")",
                             lineno);
        }
        it->second(value, lineno);
    }

    // distance may have been set after the pool line; resolve at the end
    cfg.angle_pool = pool_set ? pool_from_string(pool_text, cfg.distance, pool_line)
                              : default_angle_pool(cfg.distance);
    cfg.validate();
    return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "camera.fx_px = " << format_double(cfg.fx) << "\n";
    out << "camera.fy_px = " << format_double(cfg.fy) << "\n";
    out << "camera.cx_px = " << format_double(cfg.cx) << "\n";
    out << "camera.cy_px = " << format_double(cfg.cy) << "\n";
    out << "camera.distance_units = " << format_double(cfg.distance) << "\n";
    out << "camera.angle_pool_deg = " << pool_to_string(cfg.angle_pool) << "\n";
    out << "image.height_px = " << cfg.image_height << "\n";
    out << "image.width_px = " << cfg.image_width << "\n";
    out << "splat.sigma2_px2 = " << format_double(cfg.splat_sigma2) << "\n";
    if (cfg.truncation_radius > 0.0) {
        out << "splat.truncation_radius_px = " << format_double(cfg.truncation_radius) << "\n";
    } else {
        out << "splat.truncation_radius_px = auto\n";
    }
    out << "kernels.sigma_px = " << format_double(cfg.kernel_sigma) << "\n";
    out << "harris.eps = " << format_double(cfg.harris_eps) << "\n";
    out << "loss.lambda1 = " << format_double(cfg.lambda1) << "\n";
    out << "loss.lambda2 = " << format_double(cfg.lambda2) << "\n";
    out << "loss.lambda1_phase2 = " << format_double(cfg.lambda1_phase2) << "\n";
    out << "loss.lambda2_phase2 = " << format_double(cfg.lambda2_phase2) << "\n";
    out << "fit.learning_rate = " << format_double(cfg.learning_rate) << "\n";
    out << "fit.beta1 = " << format_double(cfg.beta1) << "\n";
    out << "fit.beta2 = " << format_double(cfg.beta2) << "\n";
    out << "fit.adam_eps = " << format_double(cfg.adam_eps) << "\n";
    out << "fit.views_per_step = " << cfg.views_per_step << "\n";
    out << "fit.phase1_steps = " << cfg.phase1_steps << "\n";
    out << "fit.phase2_steps = " << cfg.phase2_steps << "\n";
    out << "fit.snapshot_interval = " << cfg.snapshot_interval << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "io.input_cloud = " << cfg.input_cloud << "\n";
    out << "io.target_cloud = " << cfg.target_cloud << "\n";
    out << "io.output_dir = " << cfg.output_dir << "\n";
    return out.str();
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

namespace {

PointCloud read_cloud_xyz(const std::string& text) {
    PointCloud cloud;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tx, ty, tz, extra;
        if (!(ls >> tx >> ty >> tz) || (ls >> extra)) {
            throw ParseError("expected 'x y z' (line " + std::to_string(lineno) + ")", lineno);
        }
        cloud.push_back(Vec3{parse_double_token(tx, lineno), parse_double_token(ty, lineno),
                             parse_double_token(tz, lineno)});
    }
    if (cloud.empty()) {
        throw ParameterError("empty cloud: file contains no points");
    }
    return cloud;
}

PointCloud read_cloud_ply(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;

    auto next_line = [&](std::string& out_line) {
        if (!std::getline(in, raw)) return false;
        ++lineno;
        out_line = trim(raw);
        return true;
    };

    std::string line;
    next_line(line);  // "ply" magic, already checked by the caller

    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<std::string> properties;
    };
    std::vector<Element> elements;
    bool ascii = false;
    while (next_line(line)) {
        if (line.empty() || line.rfind("comment", 0) == 0) continue;
        if (line.rfind("format", 0) == 0) {
            ascii = line.find("ascii") != std::string::npos;
            continue;
        }
        if (line.rfind("element", 0) == 0) {
            std::istringstream ls(line);
            std::string kw, name, count;
            ls >> kw >> name >> count;
            elements.push_back(Element{name, static_cast<std::size_t>(parse_int_token(count, lineno)), {}});
            continue;
        }
        if (line.rfind("property", 0) == 0) {
            if (elements.empty()) {
                throw ParseError("property before any element (line " + std::to_string(lineno) + ")",
                                 lineno);
            }
            std::istringstream ls(line);
            std::string kw, type, name;
            ls >> kw >> type;
            if (type == "list") {
                // property list <count type> <entry type> <name>
                std::string t2;
                ls >> t2 >> t2 >> name;
            } else {
                ls >> name;
            }
            elements.back().properties.push_back(name);
            continue;
        }
        if (line == "end_header") break;
        throw ParseError("unrecognized header line '" + line + "' (line " + std::to_string(lineno) +
                             ")",
                         lineno);
    }
    if (!ascii) {
        throw ParseError("only ascii polygon files are supported", lineno);
    }

    PointCloud cloud;
    for (const Element& el : elements) {
        if (el.name == "vertex") {
            int xi = -1, yi = -1, zi = -1;
            for (std::size_t p = 0; p < el.properties.size(); ++p) {
                if (el.properties[p] == "x") xi = static_cast<int>(p);
                if (el.properties[p] == "y") yi = static_cast<int>(p);
                if (el.properties[p] == "z") zi = static_cast<int>(p);
            }
            if (xi < 0 || yi < 0 || zi < 0) {
                throw ParseError("vertex element lacks x/y/z properties", lineno);
            }
            for (std::size_t i = 0; i < el.count; ++i) {
                if (!next_line(line)) {
                    throw ParseError("unexpected end of file inside vertex data", lineno);
                }
                std::istringstream ls(line);
                std::vector<std::string> tokens;
                std::string tok;
                while (ls >> tok) tokens.push_back(tok);
                if (tokens.size() < el.properties.size()) {
                    throw ParseError("vertex line has too few values (line " +
                                         std::to_string(lineno) + ")",
                                     lineno);
                }
                cloud.push_back(Vec3{parse_double_token(tokens[xi], lineno),
                                     parse_double_token(tokens[yi], lineno),
                                     parse_double_token(tokens[zi], lineno)});
            }
        } else {
            // skip the data lines of any other element (faces etc.)
            for (std::size_t i = 0; i < el.count; ++i) {
                if (!next_line(line)) {
                    throw ParseError("unexpected end of file inside '" + el.name + "' data",
                                     lineno);
                }
            }
        }
    }
    if (cloud.empty()) {
        throw ParameterError("empty cloud: file contains no vertices");
    }
    return cloud;
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
    const std::string text = read_file(path);
    // sniff the magic token
    std::istringstream in(text);
    std::string first;
    in >> first;
    if (first == "ply") {
        return read_cloud_ply(text);
    }
    return read_cloud_xyz(text);
}

void write_cloud(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const Vec3& p : cloud) {
        out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z)
            << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

void write_image_pgm(const ImageGrid& grid, const std::string& path, bool normalize) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P5\n" << grid.width << ' ' << grid.height << " 255\n";
    std::vector<unsigned char> bytes(grid.size());
    if (normalize) {
        double mn = grid.data.empty() ? 0.0 : grid.data[0];
        double mx = mn;
        for (double v : grid.data) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        const double scale = mx > mn ? 255.0 / (mx - mn) : 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            bytes[i] = static_cast<unsigned char>(std::lround((grid.data[i] - mn) * scale));
        }
    } else {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            bytes[i] = static_cast<unsigned char>(
                std::lround(std::clamp(grid.data[i], 0.0, 255.0)));
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

ImageGrid read_image_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    auto next_token = [&]() -> std::string {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw ParseError("truncated graymap header in '" + path + "'");
    };
    if (next_token() != "P5") {
        throw ParseError("'" + path + "' is not a binary graymap (P5)");
    }
    const int w = static_cast<int>(parse_int_token(next_token(), 0));
    const int h = static_cast<int>(parse_int_token(next_token(), 0));
    const int maxval = static_cast<int>(parse_int_token(next_token(), 0));
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) {
        throw ParseError("unsupported graymap geometry in '" + path + "'");
    }
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("truncated pixel data in '" + path + "'");
    ImageGrid grid(h, w);
    const double inv = 1.0 / maxval;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.data[i] = bytes[i] * inv;
    }
    return grid;
}

void write_image_text(const ImageGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << grid.height << ' ' << grid.width << '\n';
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c) out << ' ';
            out << format_double(grid.at(r, c));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

ImageGrid read_image_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    int h = 0, w = 0;
    if (!(in >> h >> w) || h < 1 || w < 1) {
        throw ParseError("bad text-grid header in '" + path + "'");
    }
    ImageGrid grid(h, w);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::string tok;
        if (!(in >> tok)) throw ParseError("truncated text grid in '" + path + "'");
        grid.data[i] = parse_double_token(tok, 0);
    }
    return grid;
}

void write_trace(const FitTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < trace.history.size(); ++i) {
        const LossReport& r = trace.history[i];
        out << i << ' ' << format_double(r.cd) << ' ' << format_double(r.edge) << ' '
            << format_double(r.corner) << ' ' << format_double(r.total) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace splatgrad
