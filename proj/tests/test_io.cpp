#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "splitfit/io.hpp"

using namespace splitfit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "splitfit_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

UdfGrid random_udf(int r, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    UdfGrid udf(GridGeometry::unit_box(r));
    for (std::int64_t i = 0; i < udf.size(); ++i) {
        udf.at(i).d = u(rng);
        udf.at(i).g = Vec3(u(rng), u(rng), u(rng));
    }
    return udf;
}

}  // namespace

TEST_CASE("NVDU round-trip is bit-identical on the payload") {
    UdfGrid udf = random_udf(6, 3);
    const fs::path p = tmp_file("rt.nvdu");
    write_nvdu(p, udf);
    UdfGrid back = read_nvdu(p);
    REQUIRE(back.r() == udf.r());
    CHECK(back.geom.spacing == udf.geom.spacing);
    for (std::int64_t i = 0; i < udf.size(); ++i) {
        // storage is f32; the round-trip must preserve the stored value exactly
        CHECK(float(back.at(i).d) == float(udf.at(i).d));
        CHECK(float(back.at(i).g.x()) == float(udf.at(i).g.x()));
    }
    // second write of the read-back grid is byte-identical
    const fs::path p2 = tmp_file("rt2.nvdu");
    write_nvdu(p2, back);
    UdfGrid back2 = read_nvdu(p2);
    for (std::int64_t i = 0; i < udf.size(); ++i)
        CHECK(back2.at(i).d == back.at(i).d);
}

TEST_CASE("NVDB and NVDL round-trips") {
    BoundaryGrid b{VoxelGrid<float>(GridGeometry::unit_box(5), 0.0f)};
    b.p.at(7) = 0.75f;
    const fs::path pb = tmp_file("rt.nvdb");
    write_nvdb(pb, b);
    BoundaryGrid bb = read_nvdb(pb);
    for (std::int64_t i = 0; i < b.p.size(); ++i) CHECK(bb.p.at(i) == b.p.at(i));

    LabelGrid l(GridGeometry::unit_box(5), 2);
    l.at(9) = 17;
    const fs::path pl = tmp_file("rt.nvdl");
    write_nvdl(pl, l);
    LabelGrid ll = read_nvdl(pl);
    for (std::int64_t i = 0; i < l.size(); ++i) CHECK(ll.at(i) == l.at(i));
}

TEST_CASE("malformed binary files are rejected") {
    const fs::path p = tmp_file("bad.nvdb");
    {
        std::ofstream out(p, std::ios::binary);
        out << "XXXX garbage";
    }
    CHECK_THROWS_AS(read_nvdb(p), MalformedFile);

    // valid header, truncated payload
    BoundaryGrid b{VoxelGrid<float>(GridGeometry::unit_box(4), 0.5f)};
    const fs::path pt = tmp_file("trunc.nvdb");
    write_nvdb(pt, b);
    fs::resize_file(pt, fs::file_size(pt) - 8);
    CHECK_THROWS_AS(read_nvdb(pt), MalformedFile);

    // magic from a different format
    const fs::path pl = tmp_file("mismatch.nvdl");
    write_nvdb(pl, b);
    CHECK_THROWS_AS(read_nvdl(pl), MalformedFile);
}

TEST_CASE("point files parse, report line numbers, and round-trip") {
    const fs::path p = tmp_file("pts.txt");
    {
        std::ofstream out(p);
        out << "# comment line\n";
        out << "0.1 0.2 0.3\n";
        out << "\n";
        out << "0.4 0.5 0.6\n";
    }
    PointCloud pc = read_points(p);
    REQUIRE(pc.points.size() == 2);
    CHECK(pc.points[1] == Vec3(0.4, 0.5, 0.6));
    CHECK(!pc.has_normals());

    const fs::path bad = tmp_file("bad.txt");
    {
        std::ofstream out(bad);
        out << "0 0 0\n";
        out << "a b\n";
    }
    try {
        read_points(bad);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }

    PointCloud with_normals;
    with_normals.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    with_normals.normals = {Vec3(0, 0, 1), Vec3(0, 1, 0)};
    const fs::path pn = tmp_file("ptsn.txt");
    write_points(pn, with_normals);
    PointCloud back = read_points(pn);
    REQUIRE(back.has_normals());
    CHECK((back.points[1] - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK((back.normals[0] - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("mixed normal presence is a parse error") {
    const fs::path p = tmp_file("mixed.txt");
    {
        std::ofstream out(p);
        out << "0 0 0 0 0 1\n";
        out << "1 0 0\n";
    }
    CHECK_THROWS_AS(read_points(p), ParseError);
}

TEST_CASE("brep.json round-trip preserves the model") {
    BRepFile cube = fixtures::gt_cube_brep();
    cube.warnings.push_back("example warning");
    const std::string text = brep_to_json(cube);
    BRepFile back = brep_from_json(text);
    CHECK(back.model.n_surfaces() == cube.model.n_surfaces());
    CHECK(back.model.n_curves() == cube.model.n_curves());
    CHECK(back.model.n_vertices() == cube.model.n_vertices());
    CHECK(back.model.FF == cube.model.FF);
    CHECK(back.model.FE == cube.model.FE);
    CHECK(back.model.EE == cube.model.EE);
    CHECK(back.model.EV == cube.model.EV);
    CHECK(back.model.FV == cube.model.FV);
    CHECK(back.warnings == cube.warnings);
    CHECK(back.config.eps1 == cube.config.eps1);
    for (int i = 0; i < cube.model.n_vertices(); ++i)
        CHECK((back.model.vertices[i] - cube.model.vertices[i]).norm() == 0.0);
    for (int i = 0; i < cube.model.n_surfaces(); ++i) {
        const Plane& a = std::get<Plane>(back.model.surfaces[i]);
        const Plane& b = std::get<Plane>(cube.model.surfaces[i]);
        CHECK(a.normal == b.normal);
        CHECK(a.offset == b.offset);
    }
    // serialization is deterministic
    CHECK(brep_to_json(back) == text);
}

TEST_CASE("brep.json rejects schema mismatches") {
    CHECK_THROWS_AS(brep_from_json("{\"format\": \"other\", \"version\": 1}"),
                    SchemaMismatch);
    CHECK_THROWS_AS(brep_from_json("not json"), ParseError);
}

TEST_CASE("manifest requires exactly one boundary source") {
    const fs::path good = tmp_file("manifest.json");
    {
        std::ofstream out(good);
        out << R"({"input": {"path": "in.txt", "kind": "points"},
                   "boundary": "analytic",
                   "config": {"resolution": 32}})";
    }
    PipelineManifest m = read_manifest(good);
    CHECK(m.kind == InputKind::Points);
    CHECK(m.analytic_detector);
    CHECK(m.config.r == 32);

    const fs::path both = tmp_file("manifest_both.json");
    {
        std::ofstream out(both);
        out << R"({"input": {"path": "in.txt", "kind": "points"},
                   "boundary": {"analytic": true, "path": "b.nvdb"},
                   "config": {"resolution": 32}})";
    }
    CHECK_THROWS_AS(read_manifest(both), SchemaMismatch);

    // labels boundary source is only valid for label inputs
    const fs::path labels = tmp_file("manifest_labels.json");
    {
        std::ofstream out(labels);
        out << R"({"input": {"path": "in.txt", "kind": "points"},
                   "boundary": "labels",
                   "config": {"resolution": 32}})";
    }
    CHECK_THROWS_AS(read_manifest(labels), SchemaMismatch);
}

TEST_CASE("eval JSON emits the headline fields") {
    EvalReport rep;
    rep.topo.fe_f1 = 0.5;
    rep.cd_surface = 0.001;
    const std::string text = eval_to_json(rep);
    CHECK(text.find("fe_f1") != std::string::npos);
    CHECK(text.find("\"chamfer\"") != std::string::npos);
    CHECK(text.find("\"surface\"") != std::string::npos);
}
