#include "laneform/io.hpp"

#include <fstream>

#include "laneform/common.hpp"

namespace laneform {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps line endings fixed
    if (!out) throw IoError("cannot open output file '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing output file '" + path.string() + "'");
}

}  // namespace

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    if (!std::filesystem::is_directory(dir))
        throw IoError("output path '" + dir.string() + "' is not a directory");
}

void write_state_csv(const std::filesystem::path& path, const Grid& g, const State& s) {
    auto out = open_out(path);
    out << "i,j,x,y,r,b,rho\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double r = s.r.at(i, j);
            const double b = s.b.at(i, j);
            out << i << ',' << j << ',' << fmt17(g.cx(i)) << ',' << fmt17(g.cy(j)) << ','
                << fmt17(r) << ',' << fmt17(b) << ',' << fmt17(r + b) << '\n';
        }
    }
    finish(out, path);
}

void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& rows) {
    auto out = open_out(path);
    out << "t,mass_r,mass_b,entropy,d0,d1,min_r,min_b,max_rho\n";
    for (const auto& w : rows) {
        out << fmt17(w.t) << ',' << fmt17(w.mass_r) << ',' << fmt17(w.mass_b) << ','
            << fmt17(w.entropy) << ',' << fmt17(w.d0) << ',' << fmt17(w.d1) << ','
            << fmt17(w.min_r) << ',' << fmt17(w.min_b) << ',' << fmt17(w.max_rho) << '\n';
    }
    finish(out, path);
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<ProfileRow>& rows,
                       double c) {
    auto out = open_out(path);
    out << "y,r,b,rho,c\n";
    for (const auto& w : rows) {
        out << fmt17(w.y) << ',' << fmt17(w.r) << ',' << fmt17(w.b) << ',' << fmt17(w.r + w.b)
            << ',' << fmt17(c) << '\n';
    }
    finish(out, path);
}

void write_phase_csv(const std::filesystem::path& path, const std::vector<PhaseRow>& rows) {
    auto out = open_out(path);
    out << "c,r,b\n";
    for (const auto& w : rows) {
        out << fmt17(w.c) << ',' << fmt17(w.r) << ',' << fmt17(w.b) << '\n';
    }
    finish(out, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string Manifest::run_id() const {
    const std::uint64_t h = fnv1a64(command + '\n' + config.dump() + '\n' + std::to_string(seed));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

nlohmann::json Manifest::to_json() const {
    nlohmann::json j;
    j["run_id"] = run_id();
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["files"] = files;
    j["wall_seconds"] = wall_seconds;
    return j;
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    write_json(dir / "manifest.json", m.to_json());
}

}  // namespace laneform
