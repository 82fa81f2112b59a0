#ifndef RISKDUAL_IO_HPP
#define RISKDUAL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "riskdual/dual_field.hpp"
#include "riskdual/primal.hpp"
#include "riskdual/simulator.hpp"

namespace riskdual {

// All files are UTF-8 with LF line endings and '.' decimal separator;
// doubles carry 17 significant digits so round-trips are exact.
std::string format_g17(double v);

std::string region_token(Region r);

// dual_field.csv: header t,y,v,region,rho_1..rho_d; rows time-major, then y
// ascending.
void write_dual_field_csv(const std::string& path, const DualField& field,
                          std::size_t claim_count);

// residuals.csv: t,y,vi_residual over the interior layers.
void write_residuals_csv(const std::string& path, const DualField& field,
                         const ResidualReport& report);

// Rebuilds a field from dual_field.csv. Geometry comes from the rows; the
// tolerance knobs and gamma come from the caller. Projection masks are not
// stored in the CSV, so the map is left empty.
DualField read_dual_field_csv(const std::string& path, const GridSpec& tolerances,
                              double gamma);

// sim_report.csv: estimate,ci_half_width,ruin_count,paths_used,seed.
void write_sim_report_csv(const std::string& path, const SimReport& report);

// trace.csv: path,t,x,theta,event.
void write_trace_csv(const std::string& path, const std::vector<TraceEvent>& events);

// primal_slice.csv: t,x,v,y_star,theta_hat,consistency.
void write_primal_csv(const std::string& path, const std::vector<PrimalSlice>& slices);

std::vector<PrimalSlice> read_primal_csv(const std::string& path);
FeedbackTable feedback_table_from_primal(const std::vector<PrimalSlice>& slices);

// verify.csv rows: check,status,value,tolerance.
struct CheckRow {
    std::string check;
    bool pass = false;
    double value = 0.0;
    double tolerance = 0.0;
};

void write_verify_csv(const std::string& path, const std::vector<CheckRow>& rows);

// 64-bit FNV-1a content hash, hex-encoded; used by the run manifest.
std::uint64_t fnv1a_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

struct ManifestEntry {
    std::string key;
    std::string value;
};

// manifest.txt: command echo, effective tolerances, per-phase wall clock and
// one content-hash line per output file.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries,
                    const std::vector<std::string>& output_files);

} // namespace riskdual

#endif // RISKDUAL_IO_HPP
