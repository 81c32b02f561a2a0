#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "s5dscr/metrics.hpp"

namespace s5dscr::metrics {
namespace {

bool psnr_better_or_equal(const Psnr& a, const Psnr& b) {
  if (a.identical) return true;
  if (b.identical) return false;
  return a.db >= b.db;
}

void mark_best(MetricsReport& r) {
  if (r.rows.empty()) return;
  Psnr best_p = r.rows.front().psnr;
  double best_scc = r.rows.front().scc, best_ssim = r.rows.front().ssim;
  for (const auto& row : r.rows) {
    if (!psnr_better_or_equal(best_p, row.psnr)) best_p = row.psnr;
    best_scc = std::max(best_scc, row.scc);
    best_ssim = std::max(best_ssim, row.ssim);
  }
  for (auto& row : r.rows) {
    row.best_psnr = psnr_better_or_equal(row.psnr, best_p);
    row.best_scc = row.scc == best_scc;
    row.best_ssim = row.ssim == best_ssim;
  }
}

}  // namespace

MetricsReport evaluate(const Cube& ref, const std::vector<LabeledCube>& tests, int band_id) {
  std::vector<std::pair<std::string, std::vector<Cube>>> sets;
  for (const auto& [label, cube] : tests) sets.push_back({label, {cube}});
  return evaluate_set({ref}, sets, band_id);
}

MetricsReport evaluate_set(const std::vector<Cube>& refs,
                           const std::vector<std::pair<std::string, std::vector<Cube>>>& tests, int band_id) {
  S5DSCR_CHECK(!refs.empty(), ErrorCode::InvalidArgument, "no reference cubes");
  MetricsReport report;
  report.band_id = band_id;
  for (const auto& [label, cubes] : tests) {
    S5DSCR_CHECK(cubes.size() == refs.size(), ErrorCode::ShapeMismatch,
                 "method '" + label + "' has " + std::to_string(cubes.size()) + " images, expected " +
                     std::to_string(refs.size()));
    MethodRow row;
    row.method = label;
    row.n_images = refs.size();
    double psnr_sum = 0.0, scc_sum = 0.0, ssim_sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto p = psnr(refs[i], cubes[i]);
      if (!p.identical) {
        psnr_sum += p.db;
        ++finite;
      }
      const auto s = scc(refs[i], cubes[i]);
      scc_sum += s.value;
      row.scc_warning = row.scc_warning || s.degenerate_channel;
      ssim_sum += ssim(refs[i], cubes[i]);
    }
    row.psnr = finite == 0 ? Psnr{0.0, true} : Psnr{psnr_sum / static_cast<double>(finite), false};
    row.scc = scc_sum / static_cast<double>(refs.size());
    row.ssim = ssim_sum / static_cast<double>(refs.size());
    report.rows.push_back(std::move(row));
  }
  mark_best(report);
  return report;
}

const MethodRow* MetricsReport::find(const std::string& method) const {
  const auto it = std::find_if(rows.begin(), rows.end(), [&](const MethodRow& r) { return r.method == method; });
  return it == rows.end() ? nullptr : &*it;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "band,method,psnr_db,scc,ssim,n_images\n" << std::setprecision(10);
  for (const auto& r : rows)
    os << band_id << ',' << r.method << ',' << r.psnr.to_string() << ',' << r.scc << ',' << r.ssim << ','
       << r.n_images << '\n';
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["band"] = band_id;
    j["method"] = r.method;
    if (r.psnr.identical)
      j["psnr_db"] = "identical";
    else
      j["psnr_db"] = r.psnr.db;
    j["scc"] = r.scc;
    j["ssim"] = r.ssim;
    j["lpips"] = nullptr;
    j["n_images"] = r.n_images;
    j["best"] = {{"psnr_db", r.best_psnr}, {"scc", r.best_scc}, {"ssim", r.best_ssim}};
    if (r.scc_warning) j["warnings"] = {"scc_zero_variance_channel"};
    rows_json.push_back(std::move(j));
  }
  return nlohmann::json{{"band", band_id}, {"rows", rows_json}}.dump(2);
}

}  // namespace s5dscr::metrics
