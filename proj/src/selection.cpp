#include "pco/selection.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "pco/error.hpp"
#include "pco/io.hpp"

namespace pco {

namespace {

// Penalty terms are sums of l_i^2 times zero-shift inner products that are
// provably nonnegative for these kernels.
bool penalty_is_nonnegative_by_construction(const KernelSpec& a, const KernelSpec& b) {
  if (a.is_bandwidth() && b.is_bandwidth())
    return a.as_bandwidth().base.kind == BaseKernelKind::Gaussian &&
           b.as_bandwidth().base.kind == BaseKernelKind::Gaussian;
  if (a.is_projection() && b.is_projection())
    return a.as_projection().basis.nested() && !a.as_projection().weighted() && !b.as_projection().weighted();
  return false;
}

std::vector<std::string> family_notes(const KernelFamily& family) {
  std::vector<std::string> notes;
  const KernelSpec& k0 = family.k0();
  if (!k0.is_projection()) return notes;
  const auto& m0 = k0.as_projection().m;
  for (const auto& s : family.specs) {
    const auto& m = s.as_projection().m;
    for (std::size_t q = 0; q < m.size(); ++q) {
      if (m[q] > m0[q]) {
        notes.push_back("overfitting kernel " + k0.label() +
                        " maximizes sup K(x,x) but is not the largest dimension tuple");
        return notes;
      }
    }
  }
  if (k0.as_projection().weighted())
    notes.push_back("weighted projection family: overfitting kernel taken as the sup K(x,x) maximizer");
  return notes;
}

}  // namespace

double penalty(GramTables& tables, const KernelSpec& spec, const KernelSpec& k0) {
  const double n = static_cast<double>(tables.sample().n());
  return 2.0 * tables.weighted_diagonal(spec, k0) / (n * n);
}

double penalty(const KernelSpec& spec, const KernelSpec& k0, const Sample& sample) {
  GramTables tables(sample);
  return penalty(tables, spec, k0);
}

SelectionReport pco_select(const KernelFamily& family, GramTables& tables) {
  if (family.specs.empty()) fail(ErrorKind::InvalidArgument, "pco_select: empty family");
  const Sample& sample = tables.sample();
  if (family.dim() != sample.d())
    fail(ErrorKind::DimensionMismatch, "family dimension " + std::to_string(family.dim()) +
                                           " does not match data dimension " + std::to_string(sample.d()));
  if (family.n != 0 && family.n != sample.n())
    warn("pco_select: family built for n = " + std::to_string(family.n) + " applied to a sample of size " +
         std::to_string(sample.n()));

  const KernelSpec& k0 = family.k0();
  std::vector<std::pair<KernelSpec, KernelSpec>> pairs;
  pairs.reserve(2 * family.size());
  for (const auto& s : family.specs) {
    pairs.emplace_back(s, s);
    pairs.emplace_back(s, k0);
  }
  tables.prepare(pairs);

  SelectionReport rep;
  rep.n = sample.n();
  rep.loss = sample.loss().kind;
  rep.k0_index = family.k0_index;
  rep.rows.resize(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    const KernelSpec& s = family.specs[i];
    SelectionRow& row = rep.rows[i];
    row.label = s.label();
    row.spec_json = kernel_to_json(s).dump();
    row.distance = criterion_distance(tables, s, k0);
    row.penalty = penalty(tables, s, k0);
    row.total = row.distance + row.penalty;
  });
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (penalty_is_nonnegative_by_construction(family.specs[i], k0) && rep.rows[i].penalty < 0.0)
      fail(ErrorKind::InvalidArgument, "penalty of " + rep.rows[i].label + " is negative");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < family.size(); ++i) {
    const double t = rep.rows[i].total;
    const double tb = rep.rows[best].total;
    if (t < tb || (t == tb && family.specs[i].smoothness() > family.specs[best].smoothness())) best = i;
  }
  rep.chosen_index = best;
  rep.notes = family_notes(family);
  return rep;
}

SelectionReport pco_select(const KernelFamily& family, const Sample& sample) {
  GramTables tables(sample);
  return pco_select(family, tables);
}

std::size_t pco_select_index(const KernelFamily& family, GramTables& tables) {
  return pco_select(family, tables).chosen_index;
}

std::string SelectionReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "selection_report";
  j["n"] = n;
  j["loss"] = to_string(loss);
  j["k0_index"] = k0_index;
  j["chosen_index"] = chosen_index;
  j["chosen"] = rows.empty() ? "" : rows[chosen_index].label;
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    nlohmann::ordered_json r;
    r["index"] = i;
    r["label"] = rows[i].label;
    r["spec"] = nlohmann::ordered_json::parse(rows[i].spec_json);
    r["distance"] = rows[i].distance;
    r["penalty"] = rows[i].penalty;
    r["total"] = rows[i].total;
    r["chosen"] = i == chosen_index;
    arr.push_back(std::move(r));
  }
  j["rows"] = std::move(arr);
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

std::string SelectionReport::to_csv() const {
  std::ostringstream os;
  os << "index,spec,distance,penalty,total,chosen\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << i << "," << csv_quote(rows[i].label) << "," << format_double(rows[i].distance) << ","
       << format_double(rows[i].penalty) << "," << format_double(rows[i].total) << ","
       << (i == chosen_index ? 1 : 0) << "\n";
  }
  return os.str();
}

QuotientConfig QuotientConfig::defaults(std::size_t n) {
  return QuotientConfig{std::pow(static_cast<double>(n), -0.25)};
}

std::optional<double> quotient_estimate(const KernelSpec& k_num, const KernelSpec& k_den, const Sample& sample_num_loss,
                                        const QuotientConfig& cfg, Point x) {
  if (!(cfg.beta > 0.0)) fail(ErrorKind::InvalidArgument, "quotient_estimate: beta must be positive");
  const double den = estimate(k_den, sample_num_loss.with_loss(LossMap{LossKind::One}), x);
  if (!(den >= cfg.beta)) return std::nullopt;
  return estimate(k_num, sample_num_loss, x) / den;
}

}  // namespace pco
