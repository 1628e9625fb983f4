#pragma once

#include <map>
#include <string>
#include <vector>

#include "ifepic/driver.hpp"

namespace ifepic {

// Comma-separated nodal scalar: header "x,y,value", one row per node in node
// id order (j outer, i inner), 17 significant digits, LF line endings.
void export_nodal_field(const std::vector<double>& values, const CartesianGrid& grid,
                        const std::string& path);

// Columns of a file written by export_nodal_field; parallel arrays in file
// order. Values round-trip bit-exactly.
struct NodalFieldData {
  std::vector<double> x, y, value;
};
NodalFieldData import_nodal_field(const std::string& path);

// Header line plus preformatted comma-separated rows.
void export_table(const std::string& header, const std::vector<std::string>& rows,
                  const std::string& path);

void export_table1(const std::vector<Table1Row>& rows, const std::string& path);
void export_table2(const std::vector<Table2Row>& rows, const std::string& path);
// Six mesh rows followed by a "rate" row.
void export_table3(const Table3Result& res, const std::string& path);

void export_particles(const ParticleSet& ps, const std::string& path);
void export_step_stats(const std::vector<StepStats>& stats, const std::string& path);

// `key = value` lines, one per line; '#' starts a comment; blank lines
// ignored. Later duplicates overwrite earlier ones.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace ifepic
