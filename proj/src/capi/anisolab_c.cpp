#include "anisolab.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "anisolab/experiments.hpp"
#include "anisolab/expr.hpp"
#include "anisolab/grid.hpp"

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

template <typename Fn>
aniso_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const anisolab::expr::ParseError& e) {
    set_error(e.what());
    return ANISO_EPARSE;
  } catch (const anisolab::expr::EvalError& e) {
    set_error(e.what());
    return ANISO_EDOMAIN;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ANISO_ERR;
  }
}

}  // namespace

struct aniso_expr {
  anisolab::expr::Expr impl;
};

extern "C" {

const char* aniso_version(void) {
  static const std::string v = anisolab::lab::version_string();
  return v.c_str();
}

const char* aniso_last_error(void) { return t_last_error.c_str(); }

aniso_status aniso_expr_parse(const char* source, uint32_t dim, aniso_expr** out) {
  if (!source || !out) {
    set_error("null argument");
    return ANISO_EINVAL;
  }
  return guarded([&] {
    auto e = anisolab::expr::Expr::parse(source, static_cast<int>(dim));
    *out = new aniso_expr{std::move(e)};
    return ANISO_OK;
  });
}

aniso_status aniso_expr_eval(const aniso_expr* e, const double* x, uint32_t n, double* out) {
  if (!e || !out || (n > 0 && !x)) {
    set_error("null argument");
    return ANISO_EINVAL;
  }
  return guarded([&] {
    *out = e->impl.eval(std::span<const double>(x, n));
    return ANISO_OK;
  });
}

aniso_status aniso_expr_diff(const aniso_expr* e, uint32_t var, aniso_expr** out) {
  if (!e || !out) {
    set_error("null argument");
    return ANISO_EINVAL;
  }
  return guarded([&] {
    *out = new aniso_expr{e->impl.diff(static_cast<int>(var))};
    return ANISO_OK;
  });
}

aniso_status aniso_expr_print(const aniso_expr* e, char* buf, size_t buflen) {
  if (!e || !buf) {
    set_error("null argument");
    return ANISO_EINVAL;
  }
  std::string s = e->impl.to_string();
  if (s.size() + 1 > buflen) {
    set_error("buffer too small (need " + std::to_string(s.size() + 1) + " bytes)");
    return ANISO_EINVAL;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return ANISO_OK;
}

void aniso_expr_free(aniso_expr* e) { delete e; }

int aniso_run(const char* config_path, const char* out_dir) {
  if (!config_path) {
    set_error("null config path");
    return 1;
  }
  return anisolab::lab::run_config_file(config_path, out_dir ? out_dir : "");
}

const char* aniso_experiment_catalog(void) {
  static const std::string catalog = [] {
    std::string out;
    for (const auto& e : anisolab::lab::experiment_catalog()) {
      out += e.name;
      out += '\t';
      out += e.description;
      out += '\n';
    }
    return out;
  }();
  return catalog.c_str();
}

aniso_status aniso_field_export_csv(const char* field_path, const char* csv_path) {
  if (!field_path) {
    set_error("null field path");
    return ANISO_EINVAL;
  }
  return guarded([&] {
    anisolab::grid::GridField f = anisolab::grid::read_field(field_path);
    if (csv_path) {
      std::ofstream out(csv_path);
      if (!out) {
        set_error(std::string("cannot write ") + csv_path);
        return ANISO_EIO;
      }
      anisolab::grid::export_csv(f, out);
    } else {
      anisolab::grid::export_csv(f, std::cout);
    }
    return ANISO_OK;
  });
}

}  // extern "C"
