#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "anisolab.h"

TEST_CASE("expression handles through the C interface") {
  aniso_expr* e = nullptr;
  REQUIRE(aniso_expr_parse("tanh(x1)/(1+x2^2)", 2, &e) == ANISO_OK);
  double x[2] = {0.5, 1.0};
  double out = 0.0;
  REQUIRE(aniso_expr_eval(e, x, 2, &out) == ANISO_OK);
  CHECK(out == doctest::Approx(std::tanh(0.5) / 2.0).epsilon(1e-15));

  aniso_expr* de = nullptr;
  REQUIRE(aniso_expr_diff(e, 1, &de) == ANISO_OK);
  REQUIRE(aniso_expr_eval(de, x, 2, &out) == ANISO_OK);
  double c = std::cosh(0.5);
  CHECK(out == doctest::Approx(1.0 / (c * c) / 2.0).epsilon(1e-12));

  char buf[256];
  REQUIRE(aniso_expr_print(e, buf, sizeof(buf)) == ANISO_OK);
  aniso_expr* back = nullptr;
  REQUIRE(aniso_expr_parse(buf, 2, &back) == ANISO_OK);
  double out2 = 0.0;
  REQUIRE(aniso_expr_eval(back, x, 2, &out2) == ANISO_OK);
  CHECK(out2 == std::tanh(0.5) / 2.0);  // same tree, bit-identical evaluation

  char tiny[2];
  CHECK(aniso_expr_print(e, tiny, sizeof(tiny)) == ANISO_EINVAL);

  aniso_expr_free(e);
  aniso_expr_free(de);
  aniso_expr_free(back);
}

TEST_CASE("error reporting") {
  aniso_expr* e = nullptr;
  CHECK(aniso_expr_parse("exp(-x1", 1, &e) == ANISO_EPARSE);
  CHECK(std::strlen(aniso_last_error()) > 0);
  CHECK(std::string(aniso_last_error()).find("byte 7") != std::string::npos);

  REQUIRE(aniso_expr_parse("log(x1)", 1, &e) == ANISO_OK);
  double x = -1.0, out = 0.0;
  CHECK(aniso_expr_eval(e, &x, 1, &out) == ANISO_EDOMAIN);
  aniso_expr_free(e);

  CHECK(aniso_expr_parse(nullptr, 1, &e) == ANISO_EINVAL);
  CHECK(aniso_run(nullptr, nullptr) == 1);
}

TEST_CASE("catalog text") {
  std::string cat = aniso_experiment_catalog();
  CHECK(cat.find("tanh-1d") != std::string::npos);
  CHECK(cat.find("theorem-gate") != std::string::npos);
  CHECK(std::string(aniso_version()).size() >= 5);
}

TEST_CASE("field container export through the documented layout") {
  // hand-written ANISO1 container: d=0, s=1, N=3, L=1, values 1,2,3
  const char* path = "capi_field.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out.write("ANISO1", 6);
    std::uint32_t d = 0, s = 1, N = 3;
    double L = 1.0, v[3] = {1.0, 2.0, 3.0};
    out.write(reinterpret_cast<char*>(&d), 4);
    out.write(reinterpret_cast<char*>(&s), 4);
    out.write(reinterpret_cast<char*>(&N), 4);
    out.write(reinterpret_cast<char*>(&L), 8);
    out.write(reinterpret_cast<char*>(v), 24);
  }
  const char* csv = "capi_field.csv";
  REQUIRE(aniso_field_export_csv(path, csv) == ANISO_OK);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,value");
  std::getline(in, line);
  CHECK(line == "-1,1");
  std::remove(path);
  std::remove(csv);

  CHECK(aniso_field_export_csv("missing.bin", nullptr) != ANISO_OK);
}
