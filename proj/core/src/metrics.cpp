#include "mssz/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mssz {

double mss_distortion(const SegmentationLabels& labels_f, const SegmentationLabels& labels_g) {
  const auto cmp = segmentation_equal(labels_f, labels_g);
  return static_cast<double>(cmp.mismatches) / static_cast<double>(cmp.match.size());
}

template <class T>
double psnr(const Field<T>& original, const Field<T>& candidate) {
  if (original.size() != candidate.size())
    raise(ErrKind::usage, "psnr: field size mismatch");
  double lo, hi;
  value_range(original, lo, hi);
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < original.size(); ++i) {
    const double d =
        static_cast<double>(original.values[i]) - static_cast<double>(candidate.values[i]);
    sum_sq += d * d;
  }
  const double rmse = std::sqrt(sum_sq / static_cast<double>(original.size()));
  if (rmse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10((hi - lo) / rmse);
}

double edit_ratio(std::uint64_t edit_count, std::uint64_t vertex_count) {
  return static_cast<double>(edit_count) / static_cast<double>(vertex_count);
}

SizeMetrics ocr_obr(std::uint64_t original_bytes, std::uint64_t archive_bytes,
                    std::uint64_t vertex_count) {
  SizeMetrics m;
  m.ocr = static_cast<double>(original_bytes) / static_cast<double>(archive_bytes);
  m.obr = 8.0 * static_cast<double>(archive_bytes) / static_cast<double>(vertex_count);
  return m;
}

template <class T>
std::uint64_t count_bound_violations(const Field<T>& original, const Field<T>& candidate,
                                     double xi) {
  if (original.size() != candidate.size())
    raise(ErrKind::usage, "bound check: field size mismatch");
  std::uint64_t violations = 0;
  for (std::uint64_t i = 0; i < original.size(); ++i) {
    const double d =
        static_cast<double>(original.values[i]) - static_cast<double>(candidate.values[i]);
    if (std::abs(d) > xi) ++violations;
  }
  return violations;
}

void print_report(std::ostream& out, const VerificationReport& r) {
  out << "mss_distortion=" << r.mss_distortion << "\n"
      << "right_labeled_ratio=" << r.right_labeled_ratio << "\n"
      << "psnr=" << r.psnr << "\n"
      << "edit_ratio=" << r.edit_ratio << "\n"
      << "ocr=" << r.ocr << "\n"
      << "obr=" << r.obr << "\n"
      << "bound_violations=" << r.bound_violations << "\n"
      << "fp_max=" << r.fp_max << "\n"
      << "fp_min=" << r.fp_min << "\n"
      << "fn_max=" << r.fn_max << "\n"
      << "fn_min=" << r.fn_min << "\n";
}

std::string report_to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["mss_distortion"] = r.mss_distortion;
  j["right_labeled_ratio"] = r.right_labeled_ratio;
  j["psnr"] = std::isinf(r.psnr) ? nlohmann::json("inf") : nlohmann::json(r.psnr);
  j["edit_ratio"] = r.edit_ratio;
  j["ocr"] = r.ocr;
  j["obr"] = r.obr;
  j["bound_violations"] = r.bound_violations;
  j["fp_max"] = r.fp_max;
  j["fp_min"] = r.fp_min;
  j["fn_max"] = r.fn_max;
  j["fn_min"] = r.fn_min;
  return j.dump(2);
}

std::string csv_header() {
  return "label,seed,dims,eb_mode,eb,abs_xi,base_distortion,base_psnr,distortion,psnr,"
         "edit_ratio,ocr,obr,bound_violations,wall_seconds,outer_iterations,"
         "c_sub_iterations,r_iterations";
}

std::string csv_row(const std::string& label, std::uint64_t seed, const std::string& dims,
                    const std::string& eb_mode, double eb, double xi,
                    const VerificationReport& base, const VerificationReport& fixed,
                    double wall_seconds, std::uint64_t outer_iterations,
                    std::uint64_t c_sub_iterations, std::uint64_t r_iterations) {
  std::ostringstream os;
  os << label << ',' << seed << ',' << dims << ',' << eb_mode << ',' << eb << ',' << xi << ','
     << base.mss_distortion << ',' << base.psnr << ',' << fixed.mss_distortion << ','
     << fixed.psnr << ',' << fixed.edit_ratio << ',' << fixed.ocr << ',' << fixed.obr << ','
     << fixed.bound_violations << ',' << wall_seconds << ',' << outer_iterations << ','
     << c_sub_iterations << ',' << r_iterations;
  return os.str();
}

template double psnr<float>(const Field<float>&, const Field<float>&);
template double psnr<double>(const Field<double>&, const Field<double>&);
template std::uint64_t count_bound_violations<float>(const Field<float>&, const Field<float>&,
                                                     double);
template std::uint64_t count_bound_violations<double>(const Field<double>&, const Field<double>&,
                                                      double);

}  // namespace mssz
