#include "riskdual/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace riskdual {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string region_token(Region r) {
    switch (r) {
        case Region::R1: return "R1";
        case Region::R2: return "R2";
        case Region::Both: return "R1R2";
        case Region::None: return "none";
    }
    return "none";
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

void write_dual_field_csv(const std::string& path, const DualField& field,
                          std::size_t claim_count) {
    std::ofstream out = open_out(path);
    out << "t,y,v,region";
    for (std::size_t i = 1; i <= claim_count; ++i) out << ",rho_" << i;
    out << "\n";
    for (std::size_t k = 0; k < field.n_layers(); ++k) {
        const ValueSlice& slice = field.slices[k];
        for (std::size_t j = 0; j < slice.size(); ++j) {
            out << format_g17(field.times[k]) << ',' << format_g17(slice.y_nodes()[j])
                << ',' << format_g17(slice.values()[j]) << ','
                << region_token(field.regions[k][j]);
            for (std::size_t i = 0; i < claim_count; ++i)
                out << ',' << format_g17(field.controls[k][j][i]);
            out << "\n";
        }
    }
}

void write_residuals_csv(const std::string& path, const DualField& field,
                         const ResidualReport& report) {
    std::ofstream out = open_out(path);
    out << "t,y,vi_residual\n";
    for (std::size_t k = 0; k < report.node_residuals.size(); ++k) {
        const ValueSlice& slice = field.slices[k];
        for (std::size_t j = 0; j < slice.size(); ++j)
            out << format_g17(field.times[k]) << ',' << format_g17(slice.y_nodes()[j])
                << ',' << format_g17(report.node_residuals[k][j]) << "\n";
    }
}

DualField read_dual_field_csv(const std::string& path, const GridSpec& tolerances,
                              double gamma) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty field csv '" + path + "'");
    std::size_t claim_count = 0;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ','))
            if (cell.rfind("rho_", 0) == 0) ++claim_count;
    }

    struct Row {
        double y, v;
        Region region;
        std::vector<double> rho;
    };
    std::map<double, std::vector<Row>> layers;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        auto next_cell = [&]() {
            if (!std::getline(ss, cell, ','))
                throw Error("field csv line " + std::to_string(line_no) + ": too few columns");
            return cell;
        };
        const double t = std::stod(next_cell());
        Row row;
        row.y = std::stod(next_cell());
        row.v = std::stod(next_cell());
        const std::string tok = next_cell();
        row.region = tok == "R1" ? Region::R1
                   : tok == "R2" ? Region::R2
                   : tok == "R1R2" ? Region::Both
                                   : Region::None;
        row.rho.resize(claim_count);
        for (std::size_t i = 0; i < claim_count; ++i) row.rho[i] = std::stod(next_cell());
        layers[t].push_back(std::move(row));
    }
    if (layers.size() < 2) throw Error("field csv '" + path + "' has fewer than two layers");

    DualField field;
    field.grid = tolerances;
    field.gamma = gamma;
    for (auto& [t, rows] : layers) {
        field.times.push_back(t);
        std::vector<double> y, v;
        std::vector<Region> regions;
        std::vector<std::vector<double>> controls;
        for (Row& r : rows) {
            y.push_back(r.y);
            v.push_back(r.v);
            regions.push_back(r.region);
            controls.push_back(std::move(r.rho));
        }
        field.slices.emplace_back(std::move(y), std::move(v), t, gamma);
        field.regions.push_back(std::move(regions));
        field.controls.push_back(std::move(controls));
    }
    field.grid.y_min = field.slices.front().y_nodes().front();
    field.grid.y_max = field.slices.front().y_nodes().back();
    field.grid.n_y = field.slices.front().size();
    field.grid.n_t = field.n_layers() - 1;
    return field;
}

void write_sim_report_csv(const std::string& path, const SimReport& report) {
    std::ofstream out = open_out(path);
    out << "estimate,ci_half_width,ruin_count,paths_used,seed\n";
    out << format_g17(report.estimate) << ',' << format_g17(report.ci_half_width) << ','
        << report.ruin_count << ',' << report.paths_used << ',' << report.seed << "\n";
}

void write_trace_csv(const std::string& path, const std::vector<TraceEvent>& events) {
    std::ofstream out = open_out(path);
    out << "path,t,x,theta,event\n";
    for (const TraceEvent& e : events)
        out << e.path << ',' << format_g17(e.t) << ',' << format_g17(e.x) << ','
            << format_g17(e.theta) << ',' << e.event << "\n";
}

void write_primal_csv(const std::string& path, const std::vector<PrimalSlice>& slices) {
    std::ofstream out = open_out(path);
    out << "t,x,v,y_star,theta_hat,consistency\n";
    for (const PrimalSlice& s : slices)
        for (std::size_t j = 0; j < s.x_nodes.size(); ++j)
            out << format_g17(s.t) << ',' << format_g17(s.x_nodes[j]) << ','
                << format_g17(s.value[j]) << ',' << format_g17(s.y_star[j]) << ','
                << format_g17(s.theta_hat[j]) << ',' << format_g17(s.consistency[j])
                << "\n";
}

std::vector<PrimalSlice> read_primal_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty primal csv '" + path + "'");

    std::map<double, PrimalSlice> by_t;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double vals[6];
        for (int c = 0; c < 6; ++c) {
            if (!std::getline(ss, cell, ','))
                throw Error("primal csv line " + std::to_string(line_no) + ": too few columns");
            vals[c] = std::stod(cell);
        }
        PrimalSlice& s = by_t[vals[0]];
        s.t = vals[0];
        s.x_nodes.push_back(vals[1]);
        s.value.push_back(vals[2]);
        s.y_star.push_back(vals[3]);
        s.theta_hat.push_back(vals[4]);
        s.consistency.push_back(vals[5]);
    }
    std::vector<PrimalSlice> out;
    out.reserve(by_t.size());
    for (auto& [t, s] : by_t) out.push_back(std::move(s));
    return out;
}

FeedbackTable feedback_table_from_primal(const std::vector<PrimalSlice>& slices) {
    FeedbackTable table;
    if (slices.empty()) return table;
    table.x_nodes = slices.front().x_nodes;
    for (const PrimalSlice& s : slices) {
        if (s.x_nodes != table.x_nodes)
            throw Error("feedback table rows must share one x grid");
        table.times.push_back(s.t);
        table.theta.push_back(s.theta_hat);
    }
    return table;
}

void write_verify_csv(const std::string& path, const std::vector<CheckRow>& rows) {
    std::ofstream out = open_out(path);
    out << "check,status,value,tolerance\n";
    for (const CheckRow& r : rows)
        out << r.check << ',' << (r.pass ? "PASS" : "FAIL") << ',' << format_g17(r.value)
            << ',' << format_g17(r.tolerance) << "\n";
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot hash '" + path + "'");
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries,
                    const std::vector<std::string>& output_files) {
    std::ofstream out = open_out(path);
    for (const ManifestEntry& e : entries) out << e.key << " = " << e.value << "\n";
    for (const std::string& f : output_files)
        out << "hash " << hash_hex(fnv1a_file(f)) << " " << f << "\n";
}

} // namespace riskdual
