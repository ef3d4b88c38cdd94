#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spshape.h"

namespace fs = std::filesystem;

namespace {
constexpr double kPi = 3.14159265358979323846;

struct DomainGuard {
  sps_domain* d = nullptr;
  ~DomainGuard() { sps_domain_free(d); }
};
}  // namespace

TEST_CASE("C API: domain lifecycle and queries") {
  const double extent[2] = {1.0, 1.0};
  const int cells[2] = {64, 64};
  DomainGuard g;
  REQUIRE(sps_domain_create(2, extent, cells, nullptr, &g.d) == SPS_OK);
  CHECK(sps_domain_dim(g.d) == 2);
  CHECK(sps_domain_spacing(g.d) == doctest::Approx(1.0 / 64));
  CHECK(sps_domain_cell_count(g.d) == 4096);
  CHECK(sps_domain_measure(g.d) == doctest::Approx(1.0));

  sps_domain* bad = nullptr;
  CHECK(sps_domain_create(2, extent, nullptr, nullptr, &bad) == SPS_ERR_INVALID);
  const int bad_cells[2] = {2, 64};
  CHECK(sps_domain_create(2, extent, bad_cells, nullptr, &bad) == SPS_ERR_CONFIG);
  CHECK(std::strlen(sps_last_error()) > 0);
}

TEST_CASE("C API: masked domain") {
  const double extent[2] = {1.0, 1.0};
  const int cells[2] = {32, 32};
  std::vector<uint8_t> mask(1024, 0);
  for (int i = 0; i < 512; ++i) mask[size_t(i)] = 1;
  DomainGuard g;
  REQUIRE(sps_domain_create(2, extent, cells, mask.data(), &g.d) == SPS_OK);
  CHECK(sps_domain_measure(g.d) == doctest::Approx(0.5));
}

TEST_CASE("C API: sets, measures, perimeter, density ratio") {
  const double extent[2] = {1.0, 1.0};
  const int cells[2] = {128, 128};
  DomainGuard g;
  REQUIRE(sps_domain_create(2, extent, cells, nullptr, &g.d) == SPS_OK);

  sps_set* disk = nullptr;
  const double c[2] = {0.5, 0.5};
  REQUIRE(sps_set_disk(g.d, c, 0.3, &disk) == SPS_OK);
  CHECK(sps_set_measure(disk) == doctest::Approx(kPi * 0.09).epsilon(0.02));

  double per = 0.0;
  CHECK(sps_set_perimeter(disk, 1, &per) == SPS_OK);
  CHECK(per == doctest::Approx(2.0 * kPi * 0.3).epsilon(0.05));
  CHECK(sps_set_perimeter(disk, 7, &per) == SPS_ERR_INVALID);

  double ratio = 0.0;
  CHECK(sps_set_density_ratio(disk, c, 0.1, &ratio) == SPS_OK);
  CHECK(ratio == 1.0);

  sps_set* rect = nullptr;
  const double lo[2] = {0.25, 0.25}, hi[2] = {0.75, 0.75};
  REQUIRE(sps_set_rect(g.d, lo, hi, &rect) == SPS_OK);
  CHECK(sps_set_measure(rect) == doctest::Approx(0.25).epsilon(0.01));

  sps_set_free(disk);
  sps_set_free(rect);
}

TEST_CASE("C API: torsion, energy, eigenvalues, gamma distance") {
  const double extent[2] = {1.0, 1.0};
  const int cells[2] = {128, 128};
  DomainGuard g;
  REQUIRE(sps_domain_create(2, extent, cells, nullptr, &g.d) == SPS_OK);
  sps_set* full = nullptr;
  REQUIRE(sps_set_full(g.d, &full) == SPS_OK);

  sps_field* w = nullptr;
  double E = 0.0;
  REQUIRE(sps_solve_torsion(full, &w, &E) == SPS_OK);
  CHECK(E < 0.0);
  CHECK(sps_field_size(w) == 128 * 128);

  double lam[3] = {0, 0, 0};
  sps_field* u[3] = {nullptr, nullptr, nullptr};
  REQUIRE(sps_eigs(full, 3, lam, u) == SPS_OK);
  CHECK(lam[0] == doctest::Approx(2.0 * kPi * kPi).epsilon(0.02));
  CHECK(lam[1] == doctest::Approx(5.0 * kPi * kPi).epsilon(0.02));
  CHECK(lam[1] == doctest::Approx(lam[2]).epsilon(0.01));

  // gamma distance of a field against itself vanishes
  double dg = -1.0;
  CHECK(sps_gamma_distance(w, w, &dg) == SPS_OK);
  CHECK(dg == 0.0);

  // penalized route approaches the exact one
  std::vector<double> ones(128 * 128, 1.0);
  sps_field* phi = nullptr;
  REQUIRE(sps_field_create(g.d, ones.data(), &phi) == SPS_OK);
  double lamp = 0.0;
  REQUIRE(sps_eigs_penalized(phi, 1e6, 1, &lamp, nullptr) == SPS_OK);
  CHECK(lamp == doctest::Approx(lam[0]).epsilon(1e-6));

  sps_field* wp = nullptr;
  double Ep = 0.0;
  REQUIRE(sps_solve_torsion_penalized(phi, 1e6, &wp, &Ep) == SPS_OK);
  CHECK(Ep == doctest::Approx(E).epsilon(1e-6));

  for (auto* f : u) sps_field_free(f);
  sps_field_free(w);
  sps_field_free(wp);
  sps_field_free(phi);
  sps_set_free(full);
}

TEST_CASE("C API: field data round trip and thresholding") {
  const double extent[2] = {1.0, 1.0};
  const int cells[2] = {16, 16};
  DomainGuard g;
  REQUIRE(sps_domain_create(2, extent, cells, nullptr, &g.d) == SPS_OK);
  std::vector<double> vals(256, 0.0);
  for (size_t i = 0; i < 128; ++i) vals[i] = 0.9;
  sps_field* f = nullptr;
  REQUIRE(sps_field_create(g.d, vals.data(), &f) == SPS_OK);
  std::vector<double> back(256, -1.0);
  REQUIRE(sps_field_copy_data(f, back.data()) == SPS_OK);
  CHECK(back == vals);

  sps_set* s = nullptr;
  REQUIRE(sps_set_from_field(f, 0.5, &s) == SPS_OK);
  CHECK(sps_set_cell_count(s) == 128);
  sps_set_free(s);
  sps_field_free(f);

  // degenerate solves surface as solver/config errors, not crashes
  sps_set* empty = nullptr;
  std::vector<double> zeros(256, 0.0);
  sps_field* zf = nullptr;
  REQUIRE(sps_field_create(g.d, zeros.data(), &zf) == SPS_OK);
  REQUIRE(sps_set_from_field(zf, 0.5, &empty) == SPS_OK);
  sps_field* w = nullptr;
  CHECK(sps_solve_torsion(empty, &w, nullptr) == SPS_ERR_CONFIG);
  sps_field_free(zf);
  sps_set_free(empty);
}

TEST_CASE("C API: run layer drives the CLI flows") {
  const fs::path dir = fs::temp_directory_path() / "spshape_capi_run";
  fs::remove_all(dir);
  const fs::path cfg = dir / "cfg.json";
  fs::create_directories(dir);
  std::ofstream(cfg) << R"({
    "seed": 4,
    "domain": {"extent": [1.0, 1.0], "cells": [48, 48]},
    "solve": {"kind": "eigs", "k": 1, "mode": "exact", "support": {"shape": "disk", "center": [0.5, 0.5], "radius": 0.4}}
  })";
  CHECK(sps_run("solve", cfg.string().c_str(), (dir / "out").string().c_str()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.csv"));

  CHECK(sps_run("solve", "/missing/config.json", nullptr) == 2);
  CHECK(sps_run(nullptr, cfg.string().c_str(), nullptr) == SPS_ERR_INVALID);
}
