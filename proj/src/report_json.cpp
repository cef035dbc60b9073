#include "blab/report_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "blab/errors.hpp"
#include "blab/geometry.hpp"
#include "blab/kernel.hpp"
#include "blab/numerics.hpp"
#include "blab/operators.hpp"
#include "blab/weights.hpp"

namespace blab {

std::string format_sci(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

namespace {

using Json = nlohmann::ordered_json;

const char* angular_string(AngularVerdict v) {
  switch (v) {
    case AngularVerdict::SomeDerivativeBelowOne:
      return "some-derivative-below-one";
    case AngularVerdict::AllAboveOne:
      return "all-above-one";
    case AngularVerdict::BoundaryCase:
      return "boundary-case";
    case AngularVerdict::Indeterminate:
      break;
  }
  return "indeterminate";
}

double log10_of(double natural_log) { return natural_log / std::log(10.0); }

// Emits one JSON document with keys in insertion order, two-space indent, and
// every float in the fixed 12-significant-digit scientific form. Non-finite
// numbers become null.
class JsonWriter {
 public:
  std::string take() {
    out_ += '\n';
    return std::move(out_);
  }

  void begin_object() { begin_container('{'); }
  void end_object() { end_container('}'); }
  void begin_array() { begin_container('['); }
  void end_array() { end_container(']'); }

  void key(const std::string& k) {
    element_prefix();
    out_ += '"';
    append_escaped(k);
    out_ += "\": ";
    pending_value_ = true;
  }

  void string_value(const std::string& s) {
    value_prefix();
    out_ += '"';
    append_escaped(s);
    out_ += '"';
  }

  void bool_value(bool b) {
    value_prefix();
    out_ += b ? "true" : "false";
  }

  void int_value(long long v) {
    value_prefix();
    out_ += std::to_string(v);
  }

  void null_value() {
    value_prefix();
    out_ += "null";
  }

  void number_value(double v) {
    if (!std::isfinite(v)) {
      null_value();
      return;
    }
    value_prefix();
    out_ += format_sci(v);
  }

 private:
  struct Level {
    bool first = true;
  };

  std::string out_;
  std::vector<Level> stack_;
  bool pending_value_ = false;
  int depth_ = 0;

  void indent() { out_.append(std::size_t(depth_) * 2, ' '); }

  void element_prefix() {
    if (stack_.empty()) return;
    if (!stack_.back().first) out_ += ',';
    stack_.back().first = false;
    out_ += '\n';
    indent();
  }

  void value_prefix() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    element_prefix();
  }

  void begin_container(char c) {
    value_prefix();
    out_ += c;
    stack_.push_back({});
    ++depth_;
  }

  void end_container(char c) {
    const bool empty = stack_.back().first;
    stack_.pop_back();
    --depth_;
    if (!empty) {
      out_ += '\n';
      indent();
    }
    out_ += c;
  }

  void append_escaped(const std::string& s) {
    for (char ch : s) {
      switch (ch) {
        case '"':
          out_ += "\\\"";
          break;
        case '\\':
          out_ += "\\\\";
          break;
        case '\n':
          out_ += "\\n";
          break;
        case '\r':
          out_ += "\\r";
          break;
        case '\t':
          out_ += "\\t";
          break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", ch);
            out_ += buf;
          } else {
            out_ += ch;
          }
      }
    }
  }
};

void emit_echo(JsonWriter& w, const Json& j) {
  if (j.is_object()) {
    w.begin_object();
    for (const auto& item : j.items()) {
      w.key(item.key());
      emit_echo(w, item.value());
    }
    w.end_object();
  } else if (j.is_array()) {
    w.begin_array();
    for (const Json& v : j) emit_echo(w, v);
    w.end_array();
  } else if (j.is_string()) {
    w.string_value(j.get<std::string>());
  } else if (j.is_boolean()) {
    w.bool_value(j.get<bool>());
  } else if (j.is_number_integer()) {
    w.int_value(j.get<long long>());
  } else if (j.is_number()) {
    w.number_value(j.get<double>());
  } else {
    w.null_value();
  }
}

void emit_source(JsonWriter& w, const std::string& source) {
  emit_echo(w, Json::parse(source));
}

void emit_weight(JsonWriter& w, const WeightSpec& ws) {
  w.begin_object();
  w.key("kind");
  switch (ws.kind) {
    case WeightKind::ExponentialType:
      w.string_value("exp");
      w.key("alpha");
      w.number_value(ws.alpha);
      w.key("c");
      w.number_value(ws.c);
      w.key("beta");
      w.number_value(ws.beta);
      break;
    case WeightKind::TestUnweighted:
      w.string_value("unweighted");
      break;
    case WeightKind::TestStandard:
      w.string_value("standard");
      w.key("gamma");
      w.number_value(ws.gamma);
      break;
  }
  w.end_object();
}

void emit_number_array(JsonWriter& w, const std::vector<double>& xs) {
  w.begin_array();
  for (double x : xs) w.number_value(x);
  w.end_array();
}

void emit_log10_array(JsonWriter& w, const std::vector<double>& natural_logs) {
  w.begin_array();
  for (double x : natural_logs) w.number_value(log10_of(x));
  w.end_array();
}

void emit_sweep(JsonWriter& w, const RingSweep& s) {
  w.key("sup_rings");
  w.begin_array();
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    w.begin_object();
    w.key("radius");
    w.number_value(s.radii[i]);
    w.key("sup_log10");
    w.number_value(log10_of(s.log_sup[i]));
    w.end_object();
  }
  w.end_array();
  w.key("angles");
  w.int_value(s.angles);
  w.key("radial");
  w.bool_value(s.radial);
}

void emit_criterion(JsonWriter& w, const CriterionPartials& c) {
  w.begin_object();
  w.key("p");
  w.number_value(c.p);
  w.key("radii");
  emit_number_array(w, c.radii);
  w.key("partials");
  emit_number_array(w, c.partials);
  w.key("verdict");
  w.string_value(to_string(c.verdict));
  w.end_object();
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  std::string s = buf;
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_';
    out += ok ? c : '_';
  }
  return out;
}

std::string pair_file_name(std::size_t i, std::size_t j, const std::string& map_label,
                           const std::string& mult_label) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%02zu_%02zu_", i, j);
  return std::string(buf) + sanitize(map_label) + "_" + sanitize(mult_label) + ".json";
}

const KernelTable& table_for(const RunConfig& cfg) {
  const KernelTable& t =
      cfg.kernel.target_radius > 0.0
          ? shared_kernel_table(cfg.weight, sq(cfg.kernel.target_radius))
          : shared_kernel_table(cfg.weight);
  if (!(t.tail_ratio <= cfg.kernel.tolerance))
    throw AccuracyError("kernel table tail ratio " + format_sci(t.tail_ratio) +
                            " exceeds the configured tolerance " +
                            format_sci(cfg.kernel.tolerance),
                        t.tail_ratio);
  return t;
}

ClassifyOptions options_for(const RunConfig& cfg) {
  ClassifyOptions opt;
  opt.radial_rings.clear();
  for (double e : cfg.rings.epsilons) opt.radial_rings.push_back(1.0 - e);
  return opt;
}

void emit_pair_header(JsonWriter& w, const RunConfig& cfg, const MapEntry& m,
                      const MultiplierEntry& u) {
  w.key("command");
  w.string_value("classify");
  w.key("weight");
  emit_weight(w, cfg.weight);
  w.key("map");
  emit_source(w, m.source);
  w.key("multiplier");
  emit_source(w, u.source);
}

std::string classification_error_json(const RunConfig& cfg, const MapEntry& m,
                                      const MultiplierEntry& u, const std::string& error) {
  JsonWriter w;
  w.begin_object();
  emit_pair_header(w, cfg, m, u);
  w.key("error");
  w.string_value(error);
  w.end_object();
  return w.take();
}

std::string classification_json(const RunConfig& cfg, const MapEntry& m, const MultiplierEntry& u,
                                const ClassificationReport& rep) {
  JsonWriter w;
  w.begin_object();
  emit_pair_header(w, cfg, m, u);
  w.key("error");
  w.null_value();

  w.key("bounded");
  w.begin_object();
  w.key("verdict");
  w.string_value(to_string(rep.bounded.verdict));
  emit_sweep(w, rep.bounded.sweep);
  w.key("norm_estimate");
  w.number_value(rep.bounded.norm_estimate);
  w.key("ratio");
  w.begin_object();
  w.key("applicable");
  w.bool_value(rep.bounded.ratio_applicable);
  w.key("radii");
  emit_number_array(w, rep.bounded.ratio_radii);
  w.key("gap_log10");
  emit_log10_array(w, rep.bounded.ratio_gap);
  w.key("verdict");
  w.string_value(to_string(rep.bounded.ratio_verdict));
  w.end_object();
  w.key("consistent");
  w.bool_value(rep.bounded.consistent);
  w.end_object();

  w.key("compact");
  w.begin_object();
  w.key("verdict");
  w.string_value(to_string(rep.compact.verdict));
  emit_sweep(w, rep.compact.sweep);
  w.key("ratio");
  w.begin_object();
  w.key("applicable");
  w.bool_value(rep.compact.ratio_applicable);
  w.key("gap_deepest_log10");
  w.number_value(log10_of(rep.compact.ratio_gap_deepest));
  w.key("verdict");
  w.string_value(to_string(rep.compact.ratio_verdict));
  w.end_object();
  w.key("angular");
  w.string_value(angular_string(rep.compact.angular));
  w.key("consistent");
  w.bool_value(rep.compact.consistent);
  w.end_object();

  w.key("essential_norm");
  if (rep.has_essential) {
    w.begin_object();
    w.key("lower");
    w.number_value(rep.essential.lower);
    w.key("upper");
    w.number_value(rep.essential.upper);
    w.key("tail_cutoffs");
    w.begin_array();
    for (int n : rep.essential.tail_cutoffs) w.int_value(n);
    w.end_array();
    w.key("tail_norms");
    emit_number_array(w, rep.essential.tail_norms);
    w.key("tail_consistent");
    w.bool_value(rep.essential.tail_consistent);
    w.end_object();
  } else {
    w.null_value();
  }

  w.key("schatten");
  w.begin_object();
  for (const auto& [p, entry] : rep.schatten) {
    w.key(format_p(p));
    w.begin_object();
    w.key("norm");
    w.begin_object();
    w.key("p");
    w.number_value(entry.norm.p);
    w.key("n");
    w.int_value(entry.norm.n);
    w.key("value_n");
    w.number_value(entry.norm.value_n);
    w.key("value_2n");
    w.number_value(entry.norm.value_2n);
    w.key("rel_change");
    w.number_value(entry.norm.rel_change);
    w.key("verdict");
    w.string_value(to_string(entry.norm.verdict));
    w.end_object();
    w.key("criterion");
    emit_criterion(w, entry.criterion);
    w.key("agree");
    w.bool_value(entry.agree);
    w.end_object();
  }
  w.end_object();

  w.key("hilbert_schmidt");
  emit_criterion(w, rep.hilbert_schmidt);

  w.key("checks");
  w.begin_object();
  w.key("problem");
  w.number_value(rep.problem_ratio);
  w.key("compactcondi");
  w.bool_value(rep.compact.consistent);
  w.key("angular");
  w.string_value(angular_string(rep.angular.verdict));
  w.key("lattice");
  w.bool_value(rep.lattice_consistent);
  w.end_object();

  w.end_object();
  return w.take();
}

Point random_disk_point(std::mt19937& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * kPi * unit(rng);
  return std::polar(r, theta);
}

}  // namespace

CommandOutput run_weight_info(const RunConfig& cfg) {
  const ClassWReport rep = check_class_W(cfg.weight, default_radial_grid());
  const bool applicable_pass = cfg.weight.kind == WeightKind::ExponentialType
                                   ? rep.in_class()
                                   : rep.tau_decreasing && rep.tau_growth_side_condition;

  JsonWriter w;
  w.begin_object();
  w.key("command");
  w.string_value("weight-info");
  w.key("weight");
  emit_weight(w, cfg.weight);
  w.key("tau_constants");
  w.begin_object();
  w.key("c1");
  w.number_value(rep.tau_constants.c1);
  w.key("c2");
  w.number_value(rep.tau_constants.c2);
  w.key("m_tau");
  w.number_value(rep.tau_constants.m_tau);
  w.end_object();
  w.key("checks");
  w.begin_object();
  w.key("log_weight_strictly_decreasing");
  w.bool_value(rep.log_weight_strictly_decreasing);
  w.key("tau_decreasing");
  w.bool_value(rep.tau_decreasing);
  w.key("tau_prime_vanishes");
  w.bool_value(rep.tau_prime_vanishes);
  w.key("tau_growth_side_condition");
  w.bool_value(rep.tau_growth_side_condition);
  w.key("alt_side_condition");
  w.bool_value(rep.alt_side_condition);
  w.key("in_class");
  w.bool_value(rep.in_class());
  w.key("applicable_pass");
  w.bool_value(applicable_pass);
  w.end_object();
  w.key("regularity");
  w.begin_array();
  for (const RegularityTrace& tr : rep.regularity) {
    w.begin_object();
    w.key("delta");
    w.number_value(tr.delta);
    w.key("j_begin");
    w.int_value(tr.j_begin);
    w.key("decreasing");
    w.bool_value(tr.decreasing);
    w.key("below_threshold");
    w.bool_value(tr.below_threshold);
    w.key("log_ratios_log10");
    emit_log10_array(w, tr.log_ratios);
    w.end_object();
  }
  w.end_array();
  w.key("regular");
  w.bool_value(rep.regular);
  w.end_object();

  CommandOutput out;
  out.exit_code = applicable_pass ? 0 : 1;
  out.files.push_back({"weight_info.json", w.take()});
  if (!applicable_pass)
    out.messages.push_back("weight-info: class checks failed for the configured weight");
  return out;
}

CommandOutput run_classify(const RunConfig& cfg) {
  CommandOutput out;
  const DiskQuadrature q = build_quadrature(cfg.quadrature.n_radial, cfg.quadrature.n_angular, 2);
  const ClassifyOptions opt = options_for(cfg);
  const KernelTable* t = nullptr;

  struct IndexEntry {
    std::string file;
    std::string map_label;
    std::string mult_label;
    std::string status;
  };
  std::vector<IndexEntry> index;

  for (std::size_t i = 0; i < cfg.maps.size(); ++i) {
    const MapEntry& m = cfg.maps[i];
    for (std::size_t j = 0; j < cfg.multipliers.size(); ++j) {
      const MultiplierEntry& u = cfg.multipliers[j];
      const std::string name = pair_file_name(i, j, m.label, u.label);
      std::string status = "ok";
      if (!m.valid) {
        out.files.push_back({name, classification_error_json(cfg, m, u, m.error)});
        out.messages.push_back("classify: skipped " + name + ": " + m.error);
        status = "error";
      } else {
        try {
          if (t == nullptr) t = &table_for(cfg);
          const ClassificationReport rep =
              classify_operator(*t, u.multiplier, m.map, q, cfg.schatten_p, opt);
          out.files.push_back({name, classification_json(cfg, m, u, rep)});
        } catch (const AccuracyError&) {
          throw;
        } catch (const Error& e) {
          out.files.push_back({name, classification_error_json(cfg, m, u, e.what())});
          out.messages.push_back("classify: failed " + name + ": " + e.what());
          status = "error";
        }
      }
      index.push_back({name, m.label, u.label, status});
    }
  }

  JsonWriter w;
  w.begin_object();
  w.key("command");
  w.string_value("classify");
  w.key("weight");
  emit_weight(w, cfg.weight);
  w.key("pairs");
  w.begin_array();
  for (const IndexEntry& e : index) {
    w.begin_object();
    w.key("file");
    w.string_value(e.file);
    w.key("map");
    w.string_value(e.map_label);
    w.key("multiplier");
    w.string_value(e.mult_label);
    w.key("status");
    w.string_value(e.status);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  out.files.insert(out.files.begin(), {"index.json", w.take()});
  return out;
}

CommandOutput run_verify(const RunConfig& cfg) {
  CommandOutput out;
  const WeightSpec& ws = cfg.weight;
  const double m_tau = max_delta(ws);
  const double delta = cfg.rings.delta > 0.0 ? cfg.rings.delta : 0.5 * m_tau;
  const double eps_min = cfg.rings.epsilons.back();
  const DiskQuadrature q = build_quadrature(cfg.quadrature.n_radial, cfg.quadrature.n_angular, 2);

  const MapEntry* me = nullptr;
  for (const MapEntry& e : cfg.maps)
    if (e.valid) {
      me = &e;
      break;
    }
  const MultiplierEntry& ue = cfg.multipliers.front();

  std::vector<std::string> failures;
  JsonWriter w;
  w.begin_object();
  w.key("command");
  w.string_value("verify");
  w.key("weight");
  emit_weight(w, ws);
  w.key("map");
  if (me != nullptr)
    emit_source(w, me->source);
  else
    w.null_value();
  w.key("multiplier");
  emit_source(w, ue.source);
  w.key("delta");
  w.number_value(delta);
  w.key("m_tau");
  w.number_value(m_tau);
  w.key("steps");
  w.begin_array();

  auto finish_step = [&](const char* name, bool pass) {
    w.key("pass");
    w.bool_value(pass);
    w.end_object();
    if (!pass) failures.push_back(name);
  };
  auto begin_step = [&](const char* name, const std::string& error) {
    w.begin_object();
    w.key("name");
    w.string_value(name);
    if (!error.empty()) {
      w.key("error");
      w.string_value(error);
    }
  };

  const KernelTable* t = nullptr;
  {
    std::string err;
    bool tol_ok = false;
    try {
      const KernelTable& tab = cfg.kernel.target_radius > 0.0
                                   ? shared_kernel_table(ws, sq(cfg.kernel.target_radius))
                                   : shared_kernel_table(ws);
      t = &tab;
      tol_ok = tab.tail_ratio <= cfg.kernel.tolerance;
    } catch (const Error& e) {
      err = e.what();
    }
    begin_step("kernel_table", err);
    if (t != nullptr) {
      w.key("k_max");
      w.int_value(t->k_max);
      w.key("rho_cert");
      w.number_value(t->rho_cert);
      w.key("r_eval");
      w.number_value(t->r_eval);
      w.key("tail_ratio");
      w.number_value(t->tail_ratio);
      w.key("tolerance");
      w.number_value(cfg.kernel.tolerance);
    }
    finish_step("kernel_table", err.empty() && tol_ok);
  }

  {
    const std::vector<double> probes = {0.3, 0.6, 1.0 - eps_min};
    std::vector<ComparabilityBounds> got;
    std::string err;
    try {
      for (double a : probes) got.push_back(comparability_check(ws, Point(a, 0.0), delta, 128));
    } catch (const Error& e) {
      err = e.what();
    }
    bool pass = err.empty();
    for (const ComparabilityBounds& b : got) pass = pass && b.within_half_two;
    begin_step("comparability", err);
    w.key("probes");
    w.begin_array();
    for (std::size_t i = 0; i < got.size(); ++i) {
      w.begin_object();
      w.key("a");
      w.number_value(probes[i]);
      w.key("min_ratio");
      w.number_value(got[i].min_ratio);
      w.key("max_ratio");
      w.number_value(got[i].max_ratio);
      w.key("within_half_two");
      w.bool_value(got[i].within_half_two);
      w.end_object();
    }
    w.end_array();
    finish_step("comparability", pass);
  }

  {
    CoveringSequence cov;
    std::string err;
    try {
      cov = build_covering(ws, delta, eps_min, 400);
    } catch (const Error& e) {
      err = e.what();
    }
    const bool pass =
        err.empty() && cov.separation_violations == 0 && cov.uncovered_points == 0;
    begin_step("covering", err);
    if (err.empty()) {
      w.key("epsilon");
      w.number_value(cov.epsilon);
      w.key("grid_n");
      w.int_value(cov.grid_n);
      w.key("points");
      w.int_value(static_cast<long long>(cov.points.size()));
      w.key("multiplicity");
      w.int_value(cov.multiplicity);
      w.key("separation_violations");
      w.int_value(cov.separation_violations);
      w.key("uncovered_points");
      w.int_value(cov.uncovered_points);
    }
    finish_step("covering", pass);
  }

  {
    std::vector<double> ring = {0.3, 0.5, 0.7};
    for (double e : cfg.rings.epsilons) ring.push_back(1.0 - e);
    std::sort(ring.begin(), ring.end());
    DiagonalEstimate de;
    std::string err = t == nullptr ? "kernel table unavailable" : "";
    if (err.empty()) {
      try {
        de = check_diagonal_estimate(*t, ring, 0.5 * delta);
      } catch (const Error& e) {
        err = e.what();
      }
    }
    const bool pass = err.empty() && de.ratio_min >= 1e-2 && de.ratio_max <= 1.0 + 1e-12 &&
                      de.diag_max < 100.0 * de.diag_min;
    begin_step("diagonal_estimate", err);
    if (err.empty()) {
      w.key("delta");
      w.number_value(de.delta);
      w.key("ratio_min");
      w.number_value(de.ratio_min);
      w.key("ratio_max");
      w.number_value(de.ratio_max);
      w.key("diag_min");
      w.number_value(de.diag_min);
      w.key("diag_max");
      w.number_value(de.diag_max);
      w.key("spread");
      w.number_value(de.diag_max / de.diag_min);
    }
    finish_step("diagonal_estimate", pass);
  }

  {
    OffDiagonalDecay od;
    std::string err = t == nullptr ? "kernel table unavailable" : "";
    if (err.empty()) {
      std::mt19937 rng(9001);
      std::vector<std::pair<Point, Point>> pairs;
      for (int s = 0; s < 10; ++s) {
        const Point src = random_disk_point(rng, 0.78);
        for (int k = 0; k < 10; ++k) pairs.push_back({src, random_disk_point(rng, 0.78)});
      }
      try {
        od = check_offdiagonal_decay(*t, pairs);
      } catch (const Error& e) {
        err = e.what();
      }
    }
    const bool pass = err.empty() && od.sigma > 0.0 && od.r_squared > 0.5;
    begin_step("offdiagonal_decay", err);
    if (err.empty()) {
      w.key("sigma");
      w.number_value(od.sigma);
      w.key("r_squared");
      w.number_value(od.r_squared);
      w.key("envelope");
      w.number_value(od.envelope);
      w.key("pairs_used");
      w.int_value(od.pairs_used);
      w.key("pairs_fit");
      w.int_value(od.pairs_fit);
      w.key("pairs_skipped");
      w.int_value(od.pairs_skipped);
    }
    finish_step("offdiagonal_decay", pass);
  }

  {
    VanishingReport vr;
    std::vector<Point> zs;
    std::string err = t == nullptr ? "kernel table unavailable" : "";
    if (err.empty()) {
      for (int n = 4; n <= 8; ++n) {
        const double z = 1.0 - std::pow(2.0, -n);
        if (z <= t->r_eval * 0.9995) zs.push_back(Point(z, 0.0));
      }
      if (zs.size() < 3) {
        err = "kernel table too shallow for the boundary ladder";
      } else {
        try {
          vr = kernel_vanishing_on_compacts(*t, 0.5, zs);
        } catch (const Error& e) {
          err = e.what();
        }
      }
    }
    const bool pass = err.empty() && vr.decreasing && vr.final_over_initial < 1e-2;
    begin_step("kernel_vanishing", err);
    if (err.empty()) {
      w.key("points");
      w.int_value(static_cast<long long>(zs.size()));
      w.key("max_values");
      emit_number_array(w, vr.max_values);
      w.key("decreasing");
      w.bool_value(vr.decreasing);
      w.key("final_over_initial");
      w.number_value(vr.final_over_initial);
    }
    finish_step("kernel_vanishing", pass);
  }

  {
    CarlesonReport cr;
    std::string err = t == nullptr ? "kernel table unavailable" : "";
    if (err.empty()) {
      try {
        cr = carleson_diagnostics(*t, DiscreteMeasure::area(q), delta);
      } catch (const Error& e) {
        err = e.what();
      }
    }
    const double bound = std::log(10.0);
    const bool pass = err.empty() && cr.log_sup_berezin < bound &&
                      cr.log_sup_averaging < bound && cr.log_sup_sequence < bound &&
                      cr.ratio_constant > 0.0 && cr.ratio_constant < 10.0;
    begin_step("carleson_area", err);
    if (err.empty()) {
      w.key("sup_berezin_log10");
      w.number_value(log10_of(cr.log_sup_berezin));
      w.key("sup_averaging_log10");
      w.number_value(log10_of(cr.log_sup_averaging));
      w.key("sup_sequence_log10");
      w.number_value(log10_of(cr.log_sup_sequence));
      w.key("ratio_constant");
      w.number_value(cr.ratio_constant);
      w.key("grid_points");
      w.int_value(static_cast<long long>(cr.grid_points));
      w.key("sequence_points");
      w.int_value(static_cast<long long>(cr.sequence_points));
      w.key("unresolved_probes");
      w.int_value(static_cast<long long>(cr.unresolved_probes));
    }
    finish_step("carleson_area", pass);
  }

  {
    bool applicable = false;
    double d = 0.0;
    double d_used = 0.0;
    JuliaReport jr;
    std::string err;
    if (me != nullptr) {
      try {
        const BoundaryDiagnostics bd = angular_derivative(me->map, Point(1.0, 0.0));
        if (bd.finite) {
          applicable = true;
          d = bd.d_phi;
          // The radial ladder approaches the derivative from below, so the
          // containment check gets a half-percent allowance on d.
          d_used = d * 1.005;
          jr = julia_containment(me->map, Point(1.0, 0.0), d_used, {0.5, 1.0, 2.0}, 400);
        }
      } catch (const Error& e) {
        err = e.what();
      }
    }
    const bool pass = err.empty() && (!applicable || jr.holds);
    begin_step("julia_containment", err);
    w.key("applicable");
    w.bool_value(applicable);
    if (applicable) {
      w.key("d_estimate");
      w.number_value(d);
      w.key("d_used");
      w.number_value(d_used);
      w.key("max_ratio");
      w.number_value(jr.max_ratio);
      w.key("samples_used");
      w.int_value(jr.samples_used);
      w.key("holds");
      w.bool_value(jr.holds);
    }
    finish_step("julia_containment", pass);
  }

  w.end_array();
  w.key("failures");
  w.begin_array();
  for (const std::string& f : failures) w.string_value(f);
  w.end_array();
  w.key("pass");
  w.bool_value(failures.empty());
  w.end_object();

  std::string csv = "r,b_phi\n";
  if (t != nullptr && me != nullptr) {
    std::vector<double> rs = {0.2, 0.4, 0.6, 0.8};
    for (double e : cfg.rings.epsilons) rs.push_back(1.0 - e);
    std::sort(rs.begin(), rs.end());
    // The transform needs kernel values at products up to the plot radius, so
    // rings beyond the table certificate are left out of the plot.
    const double r_cap = t->rho_cert * (1.0 - 1e-9);
    for (double r : rs) {
      if (r > r_cap) continue;
      const double b = phi_berezin(*t, ue.multiplier, me->map, Point(r, 0.0), q);
      csv += format_sci(r) + "," + format_sci(b) + "\n";
    }
  }

  out.exit_code = failures.empty() ? 0 : 1;
  out.files.push_back({"verify.json", w.take()});
  out.files.push_back({"verify_plot.csv", csv});
  if (failures.empty()) {
    out.messages.push_back("verify: all invariants hold");
  } else {
    std::string msg = "verify: FAILED:";
    for (const std::string& f : failures) msg += " " + f;
    out.messages.push_back(msg);
  }
  return out;
}

}  // namespace blab
