#include "ifepic/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ifepic {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("write to " + path + " failed");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& path, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(path + ":" + std::to_string(line) + ": not a number: " + s);
  }
  if (trim(s.substr(used)) != "")
    throw Error(path + ":" + std::to_string(line) + ": trailing junk: " + s);
  return v;
}

}  // namespace

void export_nodal_field(const std::vector<double>& values, const CartesianGrid& grid,
                        const std::string& path) {
  if (static_cast<int>(values.size()) != grid.node_count())
    throw Error("export_nodal_field: array does not match node count");
  std::ofstream out = open_out(path);
  out << "x,y,value\n";
  for (int j = 0; j < grid.nny(); ++j)
    for (int i = 0; i < grid.nnx(); ++i) {
      const Vec2 p = grid.node_pos(i, j);
      out << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(values[grid.node_id(i, j)]) << '\n';
    }
  finish(out, path);
}

NodalFieldData import_nodal_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y,value")
    throw Error(path + ": missing x,y,value header");
  NodalFieldData data;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double cols[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(row, cell, ','))
        throw Error(path + ":" + std::to_string(ln) + ": expected 3 columns");
      cols[c] = parse_double(cell, path, ln);
    }
    if (std::getline(row, cell, ','))
      throw Error(path + ":" + std::to_string(ln) + ": expected 3 columns");
    data.x.push_back(cols[0]);
    data.y.push_back(cols[1]);
    data.value.push_back(cols[2]);
  }
  return data;
}

void export_table(const std::string& header, const std::vector<std::string>& rows,
                  const std::string& path) {
  std::ofstream out = open_out(path);
  out << header << '\n';
  for (const std::string& r : rows) out << r << '\n';
  finish(out, path);
}

void export_table1(const std::vector<Table1Row>& rows, const std::string& path) {
  std::vector<std::string> lines;
  for (const Table1Row& r : rows)
    lines.push_back(std::to_string(r.n) + ',' + fmt(r.rho_std) + ',' + fmt(r.err_std) + ',' +
                    fmt(r.rho_imp) + ',' + fmt(r.err_imp));
  export_table("N,rho_bar_std,err_std,rho_bar_imp,err_imp", lines, path);
}

void export_table2(const std::vector<Table2Row>& rows, const std::string& path) {
  std::vector<std::string> lines;
  for (const Table2Row& r : rows)
    lines.push_back(std::to_string(r.n) + ',' + fmt(r.err_trad) + ',' + fmt(r.err_imp));
  export_table("N,err_trad,err_imp", lines, path);
}

void export_table3(const Table3Result& res, const std::string& path) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < res.meshes.size(); ++i)
    lines.push_back(std::to_string(res.meshes[i]) + ',' + fmt(res.err_trad[i]) + ',' +
                    fmt(res.err_imp[i]));
  lines.push_back("rate," + fmt(res.rate_trad) + ',' + fmt(res.rate_imp));
  export_table("mesh,err_trad,err_imp", lines, path);
}

void export_particles(const ParticleSet& ps, const std::string& path) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < ps.size(); ++i)
    lines.push_back(fmt(ps.pos[i].x) + ',' + fmt(ps.pos[i].y) + ',' + fmt(ps.vel[i].x) + ',' +
                    fmt(ps.vel[i].y) + ',' + fmt(ps.charge[i]) + ',' +
                    std::to_string(int(ps.active[i])));
  export_table("x,y,vx,vy,q,active", lines, path);
}

void export_step_stats(const std::vector<StepStats>& stats, const std::string& path) {
  std::vector<std::string> lines;
  for (const StepStats& s : stats)
    lines.push_back(std::to_string(s.step) + ',' + std::to_string(s.active) + ',' +
                    fmt(s.total_charge) + ',' + fmt(s.residual));
  export_table("step,active,total_charge,residual", lines, path);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(path + ":" + std::to_string(ln) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw Error(path + ":" + std::to_string(ln) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

}  // namespace ifepic
