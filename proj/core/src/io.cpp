#include "splitfit/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "splitfit/types.hpp"

namespace splitfit {
namespace {

using ordered_json = nlohmann::ordered_json;

// --- raw little-endian scalar IO (assumes LE host) -----------------------

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw MalformedFile("truncated file: " + path.string());
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw MalformedFile("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw MalformedFile("cannot open: " + path.string());
    return is;
}

void write_header(std::ostream& os, const char magic[4], std::uint32_t r) {
    os.write(magic, 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, r);
}

int read_header(std::istream& is, const char magic[4],
                const std::filesystem::path& path) {
    char m[4];
    is.read(m, 4);
    if (!is || std::memcmp(m, magic, 4) != 0) {
        throw MalformedFile("bad magic in " + path.string());
    }
    const auto version = get<std::uint32_t>(is, path);
    if (version != 1) {
        throw MalformedFile("unsupported version " + std::to_string(version) +
                            " in " + path.string());
    }
    const auto r = get<std::uint32_t>(is, path);
    if (r < 1 || r > 4096) {
        throw MalformedFile("implausible resolution in " + path.string());
    }
    return int(r);
}

// --- JSON helpers --------------------------------------------------------

ordered_json vec_to_json(const Vec3& v) {
    return ordered_json::array({v.x(), v.y(), v.z()});
}

Vec3 vec_from_json(const ordered_json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaMismatch("expected [x,y,z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json surface_to_json(const SurfacePrimitive& s) {
    ordered_json j;
    switch (surface_kind(s)) {
        case SurfaceKind::Plane: {
            const auto& p = std::get<Plane>(s);
            j["type"] = "plane";
            j["normal"] = vec_to_json(p.normal);
            j["offset"] = p.offset;
            break;
        }
        case SurfaceKind::Sphere: {
            const auto& p = std::get<Sphere>(s);
            j["type"] = "sphere";
            j["center"] = vec_to_json(p.center);
            j["radius"] = p.radius;
            break;
        }
        case SurfaceKind::Cylinder: {
            const auto& p = std::get<Cylinder>(s);
            j["type"] = "cylinder";
            j["point"] = vec_to_json(p.point);
            j["axis"] = vec_to_json(p.axis);
            j["radius"] = p.radius;
            break;
        }
        case SurfaceKind::Cone: {
            const auto& p = std::get<Cone>(s);
            j["type"] = "cone";
            j["apex"] = vec_to_json(p.apex);
            j["axis"] = vec_to_json(p.axis);
            j["half_angle"] = p.half_angle;
            break;
        }
        case SurfaceKind::Torus: {
            const auto& p = std::get<Torus>(s);
            j["type"] = "torus";
            j["center"] = vec_to_json(p.center);
            j["axis"] = vec_to_json(p.axis);
            j["major_radius"] = p.major_radius;
            j["minor_radius"] = p.minor_radius;
            break;
        }
    }
    return j;
}

ordered_json curve_to_json(const CurvePrimitive& c) {
    ordered_json j;
    switch (curve_kind(c)) {
        case CurveKind::Line: {
            const auto& p = std::get<Line>(c);
            j["type"] = "line";
            j["point"] = vec_to_json(p.point);
            j["direction"] = vec_to_json(p.direction);
            break;
        }
        case CurveKind::Circle: {
            const auto& p = std::get<Circle>(c);
            j["type"] = "circle";
            j["center"] = vec_to_json(p.center);
            j["normal"] = vec_to_json(p.normal);
            j["radius"] = p.radius;
            break;
        }
        case CurveKind::Ellipse: {
            const auto& p = std::get<Ellipse>(c);
            j["type"] = "ellipse";
            j["center"] = vec_to_json(p.center);
            j["normal"] = vec_to_json(p.normal);
            j["major_axis"] = vec_to_json(p.major_axis);
            j["a"] = p.a;
            j["b"] = p.b;
            break;
        }
    }
    return j;
}

std::string type_of(const ordered_json& j) {
    if (!j.is_object() || !j.contains("type")) {
        throw SchemaMismatch("primitive record missing \"type\"");
    }
    return j.at("type").get<std::string>();
}

SurfacePrimitive surface_from_json(const ordered_json& j) {
    const std::string t = type_of(j);
    try {
        if (t == "plane") {
            return Plane{vec_from_json(j.at("normal")), j.at("offset").get<double>()};
        }
        if (t == "sphere") {
            return Sphere{vec_from_json(j.at("center")), j.at("radius").get<double>()};
        }
        if (t == "cylinder") {
            return Cylinder{vec_from_json(j.at("point")), vec_from_json(j.at("axis")),
                            j.at("radius").get<double>()};
        }
        if (t == "cone") {
            return Cone{vec_from_json(j.at("apex")), vec_from_json(j.at("axis")),
                        j.at("half_angle").get<double>()};
        }
        if (t == "torus") {
            return Torus{vec_from_json(j.at("center")), vec_from_json(j.at("axis")),
                         j.at("major_radius").get<double>(),
                         j.at("minor_radius").get<double>()};
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("bad surface record: ") + e.what());
    }
    throw SchemaMismatch("unknown surface type \"" + t + "\"");
}

CurvePrimitive curve_from_json(const ordered_json& j) {
    const std::string t = type_of(j);
    try {
        if (t == "line") {
            return Line{vec_from_json(j.at("point")), vec_from_json(j.at("direction"))};
        }
        if (t == "circle") {
            return Circle{vec_from_json(j.at("center")), vec_from_json(j.at("normal")),
                          j.at("radius").get<double>()};
        }
        if (t == "ellipse") {
            return Ellipse{vec_from_json(j.at("center")), vec_from_json(j.at("normal")),
                           vec_from_json(j.at("major_axis")), j.at("a").get<double>(),
                           j.at("b").get<double>()};
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("bad curve record: ") + e.what());
    }
    throw SchemaMismatch("unknown curve type \"" + t + "\"");
}

// Symmetric matrices serialize as i<j pairs, rectangular ones as all pairs.
ordered_json matrix_pairs(const BoolMatrix& m, bool symmetric) {
    ordered_json out = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = symmetric ? i + 1 : 0; j < m.cols(); ++j) {
            if (m.at(i, j)) out.push_back(ordered_json::array({i, j}));
        }
    }
    return out;
}

BoolMatrix matrix_from_pairs(const ordered_json& j, int rows, int cols,
                             bool symmetric) {
    BoolMatrix m(rows, cols);
    if (!j.is_array()) throw SchemaMismatch("matrix must be a pair list");
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw SchemaMismatch("bad index pair");
        const int a = e[0].get<int>(), b = e[1].get<int>();
        if (a < 0 || a >= rows || b < 0 || b >= cols) {
            throw SchemaMismatch("matrix index out of range");
        }
        m.set(a, b);
        if (symmetric) m.set(b, a);
    }
    return m;
}

ordered_json config_to_json(const Config& cfg) {
    ordered_json j;
    j["resolution"] = cfg.r;
    j["patch_stride"] = cfg.patch_stride;
    j["patch_size"] = cfg.patch_size;
    j["eps1"] = cfg.eps1;
    j["eps2"] = cfg.eps2;
    j["eps3"] = cfg.eps3;
    j["tau"] = cfg.tau;
    j["match_thresholds"] = cfg.match_thresholds;
    j["seed"] = cfg.seed;
    // threads is intentionally omitted: outputs must not depend on it
    return j;
}

Config config_from_json(const ordered_json& j, Config base = {}) {
    if (!j.is_object()) throw SchemaMismatch("config must be an object");
    try {
        if (j.contains("resolution")) base.r = j.at("resolution").get<int>();
        if (j.contains("patch_stride")) base.patch_stride = j.at("patch_stride").get<int>();
        if (j.contains("patch_size")) base.patch_size = j.at("patch_size").get<int>();
        if (j.contains("eps1")) base.eps1 = j.at("eps1").get<double>();
        if (j.contains("eps2")) base.eps2 = j.at("eps2").get<double>();
        if (j.contains("eps3")) base.eps3 = j.at("eps3").get<double>();
        if (j.contains("tau")) base.tau = j.at("tau").get<double>();
        if (j.contains("match_thresholds")) {
            base.match_thresholds = j.at("match_thresholds").get<std::vector<double>>();
        }
        if (j.contains("threads")) base.threads = j.at("threads").get<int>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("bad config: ") + e.what());
    }
    if (!base.valid()) throw SchemaMismatch("config violates its invariants");
    return base;
}

ordered_json parse_text(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(e.what());
    }
}

ordered_json parse_file(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, false);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str());
}

ordered_json class_report_to_json(const ClassReport& r) {
    ordered_json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["good"] = r.good_count;
    j["total"] = r.total_count;
    ordered_json pairs = ordered_json::array();
    for (const auto& [p, g] : r.matched) pairs.push_back(ordered_json::array({p, g}));
    j["matched"] = pairs;
    return j;
}

ordered_json report_to_json(const DetectionReport& r) {
    ordered_json j;
    j["threshold"] = r.threshold;
    j["surface"] = class_report_to_json(r.surface);
    j["curve"] = class_report_to_json(r.curve);
    j["vertex"] = class_report_to_json(r.vertex);
    return j;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& rel) {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

// --- binary grids --------------------------------------------------------

void write_nvdu(const std::filesystem::path& path, const UdfGrid& udf) {
    std::ofstream os = open_out(path, true);
    write_header(os, "NVDU", std::uint32_t(udf.r()));
    put<double>(os, udf.geom.origin.x());
    put<double>(os, udf.geom.origin.y());
    put<double>(os, udf.geom.origin.z());
    put<double>(os, udf.geom.spacing);
    for (const UdfVoxel& v : udf.values) {
        put<float>(os, float(v.d));
        put<float>(os, float(v.g.x()));
        put<float>(os, float(v.g.y()));
        put<float>(os, float(v.g.z()));
    }
}

UdfGrid read_nvdu(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, true);
    const int r = read_header(is, "NVDU", path);
    GridGeometry g;
    g.r = r;
    g.origin.x() = get<double>(is, path);
    g.origin.y() = get<double>(is, path);
    g.origin.z() = get<double>(is, path);
    g.spacing = get<double>(is, path);
    UdfGrid udf(g);
    for (UdfVoxel& v : udf.values) {
        v.d = get<float>(is, path);
        v.g.x() = get<float>(is, path);
        v.g.y() = get<float>(is, path);
        v.g.z() = get<float>(is, path);
    }
    return udf;
}

void write_nvdb(const std::filesystem::path& path, const BoundaryGrid& b) {
    std::ofstream os = open_out(path, true);
    write_header(os, "NVDB", std::uint32_t(b.r()));
    for (float p : b.p.values) put<float>(os, p);
}

BoundaryGrid read_nvdb(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, true);
    const int r = read_header(is, "NVDB", path);
    BoundaryGrid b{VoxelGrid<float>(GridGeometry::unit_box(r))};
    for (float& p : b.p.values) p = get<float>(is, path);
    return b;
}

void write_nvdl(const std::filesystem::path& path, const LabelGrid& labels) {
    std::ofstream os = open_out(path, true);
    write_header(os, "NVDL", std::uint32_t(labels.r()));
    for (std::int32_t v : labels.values) put<std::uint32_t>(os, std::uint32_t(v));
}

LabelGrid read_nvdl(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, true);
    const int r = read_header(is, "NVDL", path);
    LabelGrid labels(GridGeometry::unit_box(r));
    for (std::int32_t& v : labels.values) {
        v = std::int32_t(get<std::uint32_t>(is, path));
    }
    return labels;
}

// --- point files ---------------------------------------------------------

PointCloud read_points(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, false);
    PointCloud pc;
    std::string line;
    int lineno = 0;
    bool saw_plain = false;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double v[6];
        int n = 0;
        while (n < 6 && (ss >> v[n])) ++n;
        ss.clear();  // a failed numeric read must not hide trailing garbage
        std::string extra;
        if (ss >> extra) {
            throw ParseError("line " + std::to_string(lineno) + ": unexpected token \"" +
                             extra + "\"");
        }
        if (n == 0) continue;  // blank or comment-only line
        if (n != 3 && n != 6) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected 3 or 6 numbers, got " + std::to_string(n));
        }
        pc.points.push_back({v[0], v[1], v[2]});
        if (n == 6) {
            if (saw_plain) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": normals appear after plain points");
            }
            pc.normals.push_back({v[3], v[4], v[5]});
        } else {
            if (!pc.normals.empty()) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": plain point after points with normals");
            }
            saw_plain = true;
        }
    }
    return pc;
}

void write_points(const std::filesystem::path& path, const PointCloud& pc) {
    std::ofstream os = open_out(path, false);
    os.precision(17);
    for (std::size_t i = 0; i < pc.points.size(); ++i) {
        const Vec3& p = pc.points[i];
        os << p.x() << ' ' << p.y() << ' ' << p.z();
        if (pc.has_normals()) {
            const Vec3& n = pc.normals[i];
            os << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
        }
        os << '\n';
    }
}

void write_obj_points(const std::filesystem::path& path,
                      const std::vector<Vec3>& points) {
    std::ofstream os = open_out(path, false);
    os.precision(9);
    for (const Vec3& p : points) {
        os << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
}

// --- brep.json -----------------------------------------------------------

std::string brep_to_json(const BRepFile& f) {
    ordered_json j;
    j["format"] = "splitfit-brep";
    j["version"] = 1;
    j["config"] = config_to_json(f.config);
    ordered_json vx = ordered_json::array();
    for (const Vec3& v : f.model.vertices) vx.push_back(vec_to_json(v));
    j["vertices"] = vx;
    ordered_json cv = ordered_json::array();
    for (const CurvePrimitive& c : f.model.curves) cv.push_back(curve_to_json(c));
    j["curves"] = cv;
    ordered_json sf = ordered_json::array();
    for (const SurfacePrimitive& s : f.model.surfaces) sf.push_back(surface_to_json(s));
    j["surfaces"] = sf;
    ordered_json topo;
    topo["FF"] = matrix_pairs(f.model.FF, true);
    topo["FE"] = matrix_pairs(f.model.FE, false);
    topo["EE"] = matrix_pairs(f.model.EE, true);
    topo["EV"] = matrix_pairs(f.model.EV, false);
    topo["FV"] = matrix_pairs(f.model.FV, false);
    j["topology"] = topo;
    j["warnings"] = f.warnings;
    return j.dump(2) + "\n";
}

BRepFile brep_from_json(const std::string& text) {
    const ordered_json j = parse_text(text);
    if (!j.is_object() || !j.contains("format") ||
        j.at("format") != "splitfit-brep") {
        throw SchemaMismatch("not a splitfit-brep file");
    }
    if (!j.contains("version") || j.at("version").get<int>() != 1) {
        throw SchemaMismatch("unsupported brep schema version");
    }
    for (const char* key : {"config", "vertices", "curves", "surfaces", "topology"}) {
        if (!j.contains(key)) throw SchemaMismatch(std::string("missing \"") + key + "\"");
    }
    BRepFile f;
    f.config = config_from_json(j.at("config"));
    try {
        for (const auto& v : j.at("vertices")) f.model.vertices.push_back(vec_from_json(v));
        for (const auto& c : j.at("curves")) f.model.curves.push_back(curve_from_json(c));
        for (const auto& s : j.at("surfaces")) f.model.surfaces.push_back(surface_from_json(s));
        const auto& topo = j.at("topology");
        const int nf = f.model.n_surfaces(), ne = f.model.n_curves(), nv = f.model.n_vertices();
        f.model.FF = matrix_from_pairs(topo.at("FF"), nf, nf, true);
        f.model.FE = matrix_from_pairs(topo.at("FE"), nf, ne, false);
        f.model.EE = matrix_from_pairs(topo.at("EE"), ne, ne, true);
        f.model.EV = matrix_from_pairs(topo.at("EV"), ne, nv, false);
        f.model.FV = matrix_from_pairs(topo.at("FV"), nf, nv, false);
        if (j.contains("warnings")) {
            f.warnings = j.at("warnings").get<std::vector<std::string>>();
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("malformed brep payload: ") + e.what());
    }
    return f;
}

void write_brep_json(const std::filesystem::path& path, const BRepFile& f) {
    std::ofstream os = open_out(path, false);
    os << brep_to_json(f);
}

BRepFile read_brep_json(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, false);
    std::stringstream ss;
    ss << is.rdbuf();
    return brep_from_json(ss.str());
}

// --- evaluation JSON -----------------------------------------------------

std::string eval_to_json(const EvalReport& rep) {
    ordered_json j;
    j["format"] = "splitfit-eval";
    j["version"] = 1;
    ordered_json cd;
    cd["surface"] = rep.cd_surface;
    cd["curve"] = rep.cd_curve;
    cd["vertex"] = rep.cd_vertex;
    j["chamfer"] = cd;
    ordered_json per = ordered_json::array();
    for (const DetectionReport& r : rep.detection.per_threshold) {
        per.push_back(report_to_json(r));
    }
    j["detection"] = per;
    j["averaged"] = report_to_json(rep.detection.averaged);
    ordered_json topo;
    topo["fe_f1"] = rep.topo.fe_f1;
    topo["ev_f1"] = rep.topo.ev_f1;
    j["topology"] = topo;
    return j.dump(2) + "\n";
}

void write_eval_json(const std::filesystem::path& path, const EvalReport& rep) {
    std::ofstream os = open_out(path, false);
    os << eval_to_json(rep);
}

// --- manifests -----------------------------------------------------------

PipelineManifest read_manifest(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    if (!j.is_object()) throw SchemaMismatch("manifest must be a JSON object");
    const std::filesystem::path base = path.parent_path();
    PipelineManifest m;
    try {
        const auto& input = j.at("input");
        m.input_path = resolve(base, input.at("path").get<std::string>());
        const std::string kind = input.at("kind").get<std::string>();
        if (kind == "points") {
            m.kind = InputKind::Points;
        } else if (kind == "labels") {
            m.kind = InputKind::Labels;
        } else if (kind == "udf-grid") {
            m.kind = InputKind::UdfGrid;
        } else {
            throw SchemaMismatch("unknown input kind \"" + kind + "\"");
        }
        if (j.contains("output_dir")) {
            m.output_dir = resolve(base, j.at("output_dir").get<std::string>());
        }
        if (j.contains("points")) {
            m.points_path = resolve(base, j.at("points").get<std::string>());
        }
        if (j.contains("normalize")) m.normalize = j.at("normalize").get<bool>();
        if (j.contains("config")) m.config = config_from_json(j.at("config"));

        // Boundary source: "analytic", "labels", or {"path": <nvdb>}.
        int sources = 0;
        m.analytic_detector = false;
        if (j.contains("boundary")) {
            const auto& b = j.at("boundary");
            if (b.is_string()) {
                const std::string s = b.get<std::string>();
                if (s == "analytic") {
                    m.analytic_detector = true;
                    ++sources;
                } else if (s == "labels") {
                    if (m.kind != InputKind::Labels) {
                        throw SchemaMismatch(
                            "boundary \"labels\" requires a labels input");
                    }
                    ++sources;
                } else {
                    throw SchemaMismatch("unknown boundary source \"" + s + "\"");
                }
            } else if (b.is_object()) {
                if (b.contains("analytic") && b.at("analytic").get<bool>()) {
                    m.analytic_detector = true;
                    ++sources;
                }
                if (b.contains("path")) {
                    m.external_boundary = resolve(base, b.at("path").get<std::string>());
                    ++sources;
                }
            } else {
                throw SchemaMismatch("boundary must be a string or object");
            }
        } else if (m.kind == InputKind::Labels) {
            ++sources;  // labels input defaults to label-derived boundary
        } else {
            m.analytic_detector = true;
            ++sources;
        }
        if (sources != 1) {
            throw SchemaMismatch("exactly one boundary source must be selected");
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

GtManifest read_gt_manifest(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    if (!j.is_object() || !j.contains("sets")) {
        throw SchemaMismatch("gt manifest must contain \"sets\"");
    }
    const std::filesystem::path base = path.parent_path();
    GtManifest m;
    if (j.contains("config")) m.config = config_from_json(j.at("config"));
    // Sampling density 0 means auto: quarter-voxel spacing at the configured
    // resolution, so the labeling error stays below the voxel size.
    double default_density = 0;
    if (j.contains("density")) default_density = j.at("density").get<double>();
    const double auto_area = 16.0 * m.config.r * m.config.r;
    const double auto_len = 4.0 * m.config.r;
    try {
        for (const auto& e : j.at("sets")) {
            const std::string t = type_of(e);
            Eigen::AlignedBox3d extent = unit_extent();
            if (e.contains("extent")) {
                extent = Eigen::AlignedBox3d(vec_from_json(e.at("extent").at("min")),
                                             vec_from_json(e.at("extent").at("max")));
            }
            double density = default_density;
            if (e.contains("density")) density = e.at("density").get<double>();
            if (t == "points") {
                m.sets.push_back(read_points(resolve(base, e.at("path").get<std::string>())).points);
            } else if (t == "vertex") {
                m.sets.push_back({vec_from_json(e.at("point"))});
            } else if (t == "line" || t == "circle" || t == "ellipse") {
                if (density <= 0) density = auto_len;
                m.sets.push_back(sample_primitive(curve_from_json(e), density, extent));
            } else {
                if (density <= 0) density = auto_area;
                m.sets.push_back(sample_primitive(surface_from_json(e), density, extent));
            }
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaMismatch(std::string("malformed gt manifest: ") + e.what());
    }
    if (m.sets.empty()) throw SchemaMismatch("gt manifest has no sets");
    return m;
}

}  // namespace splitfit
