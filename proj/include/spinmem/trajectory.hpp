/*
   Copyright 2026 The spinmem authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinmem/errors.hpp"
#include "spinmem/io.hpp"
#include "spinmem/params.hpp"

namespace spinmem {

/// One stochastic realization: transverse spin components and the detected
/// output flux sampled on a uniform grid. Regenerating with the same params,
/// config and seed reproduces the arrays bit-exactly.
struct Trajectory {
    double dt_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> jy;
    std::vector<double> jz;
    std::vector<double> sy_out; ///< detected flux samples, s^-1 (step-averaged shot noise)

    std::size_t size() const { return sy_out.size(); }
};

// Binary columnar format: 8-byte magic, u64 params hash, u64 seed, f64 dt,
// u64 length, then jy / jz / sy_out as little-endian f64 columns.
inline constexpr char trajectory_magic[9] = "spntrj01";

inline void save_trajectory(const Trajectory& t, const ExperimentParams& p,
                            const std::string& path) {
    std::string out;
    out.reserve(40 + 24 * t.size());
    out.append(trajectory_magic, 8);
    io::append_le_u64(out, params_hash(p));
    io::append_le_u64(out, t.seed);
    io::append_le_f64(out, t.dt_s);
    io::append_le_u64(out, t.size());
    for (double v : t.jy) io::append_le_f64(out, v);
    for (double v : t.jz) io::append_le_f64(out, v);
    for (double v : t.sy_out) io::append_le_f64(out, v);
    io::write_file_atomic(path, out);
}

/// Loads a trajectory and verifies the stored params hash against `expected`.
inline Trajectory load_trajectory(const std::string& path, const ExperimentParams& expected) {
    std::string s = io::read_file(path);
    if (s.size() < 40 || s.compare(0, 8, trajectory_magic, 8) != 0)
        throw Error(Errc::io_error, path + " is not a trajectory file");
    if (io::read_le_u64(s, 8) != params_hash(expected))
        throw Error(Errc::hash_mismatch, path + " was produced with different parameters");
    Trajectory t;
    t.seed = io::read_le_u64(s, 16);
    t.dt_s = io::read_le_f64(s, 24);
    const std::uint64_t n = io::read_le_u64(s, 32);
    if (s.size() != 40 + 24 * n) throw Error(Errc::io_error, path + " is truncated");
    t.jy.resize(n);
    t.jz.resize(n);
    t.sy_out.resize(n);
    std::size_t off = 40;
    for (auto& v : t.jy) { v = io::read_le_f64(s, off); off += 8; }
    for (auto& v : t.jz) { v = io::read_le_f64(s, off); off += 8; }
    for (auto& v : t.sy_out) { v = io::read_le_f64(s, off); off += 8; }
    return t;
}

inline std::string trajectory_csv(const Trajectory& t, const ExperimentParams& p) {
    std::string out = "# spinmem trajectory; params_hash=" + params_hash_hex(p) +
                      "; seed=" + std::to_string(t.seed) + "\n";
    out += "t,jy,jz,sy_out\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += io::fmt(static_cast<double>(i) * t.dt_s);
        out += ',';
        out += io::fmt(t.jy[i]);
        out += ',';
        out += io::fmt(t.jz[i]);
        out += ',';
        out += io::fmt(t.sy_out[i]);
        out += '\n';
    }
    return out;
}

} // namespace spinmem
