#pragma once

// Evaluation metrics for verification reports and the bench harness.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mssz/field.hpp"
#include "mssz/mss.hpp"

namespace mssz {

struct VerificationReport {
  double mss_distortion = 0.0;     // wrong (m,M) pairs / N
  double right_labeled_ratio = 1.0;
  double psnr = 0.0;               // dB; +inf when RMSE is 0
  double edit_ratio = 0.0;         // |edits| / N
  double ocr = 0.0;                // original bytes / archive bytes
  double obr = 0.0;                // bits per point including edit metadata
  std::uint64_t bound_violations = 0;
  std::uint64_t fp_max = 0, fp_min = 0, fn_max = 0, fn_min = 0;
};

double mss_distortion(const SegmentationLabels& labels_f, const SegmentationLabels& labels_g);

// 20*log10(range(f) / RMSE(f,g)); range taken from the original field.
template <class T>
double psnr(const Field<T>& original, const Field<T>& candidate);

double edit_ratio(std::uint64_t edit_count, std::uint64_t vertex_count);

struct SizeMetrics {
  double ocr;
  double obr;
};
SizeMetrics ocr_obr(std::uint64_t original_bytes, std::uint64_t archive_bytes,
                    std::uint64_t vertex_count);

template <class T>
std::uint64_t count_bound_violations(const Field<T>& original, const Field<T>& candidate,
                                     double xi);

// key=value lines, one per field
void print_report(std::ostream& out, const VerificationReport& report);
std::string report_to_json(const VerificationReport& report);

std::string csv_header();
std::string csv_row(const std::string& label, std::uint64_t seed, const std::string& dims,
                    const std::string& eb_mode, double eb, double xi,
                    const VerificationReport& base, const VerificationReport& fixed,
                    double wall_seconds, std::uint64_t outer_iterations,
                    std::uint64_t c_sub_iterations, std::uint64_t r_iterations);

}  // namespace mssz
