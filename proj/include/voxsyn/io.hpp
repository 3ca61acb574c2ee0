#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

// ---------------------------------------------------------------------------
// VOL1 container: <name>.json header + <name>.raw payload, little-endian,
// z-major. The header path is the canonical handle for a volume.
// ---------------------------------------------------------------------------

namespace detail {

inline std::filesystem::path raw_path_for(const std::filesystem::path& header_path) {
    std::filesystem::path p = header_path;
    p.replace_extension(".raw");
    return p;
}

inline std::string shortest_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void append_le(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

inline std::uint32_t read_le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

inline VolumeKind volume_kind_from_string(const std::string& s) {
    if (s == "raw") return VolumeKind::raw;
    if (s == "prob") return VolumeKind::prob;
    if (s == "label") return VolumeKind::label;
    throw format_error("VOL1: unknown kind \"" + s + "\"");
}

inline void write_volume(const Volume3D& vol, const std::string& header_path) {
    const Shape3 shape = vol.shape();
    nlohmann::ordered_json hdr;
    hdr["magic"] = "VOL1";
    hdr["shape"] = {shape[0], shape[1], shape[2]};
    hdr["dtype"] = vol.is_uint8() ? "uint8" : "float32";
    hdr["voxel_size_nm"] = {vol.meta.voxel_size_nm[0], vol.meta.voxel_size_nm[1],
                            vol.meta.voxel_size_nm[2]};
    hdr["kind"] = to_string(vol.meta.kind);

    {
        std::ofstream out(header_path, std::ios::binary);
        if (!out) throw format_error("cannot write volume header: " + header_path);
        out << hdr.dump(2) << "\n";
    }

    const auto raw = detail::raw_path_for(header_path);
    std::ofstream out(raw, std::ios::binary);
    if (!out) throw format_error("cannot write volume payload: " + raw.string());
    if (vol.is_uint8()) {
        const auto& g = vol.as_uint8();
        out.write(reinterpret_cast<const char*>(g.data().data()),
                  static_cast<std::streamsize>(g.data().size()));
    } else {
        const auto& g = vol.as_float();
        std::vector<unsigned char> buf;
        buf.reserve(g.data().size() * 4);
        for (float f : g.data()) detail::append_le(buf, std::bit_cast<std::uint32_t>(f));
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw format_error("short write of volume payload: " + raw.string());
}

inline Volume3D read_volume(const std::string& header_path) {
    std::ifstream in(header_path, std::ios::binary);
    if (!in) throw format_error("cannot open volume header: " + header_path);
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw format_error("invalid VOL1 header " + header_path + ": " + e.what());
    }
    if (!hdr.contains("magic") || hdr["magic"] != "VOL1")
        throw format_error("VOL1: bad or missing magic in " + header_path);
    for (const char* key : {"shape", "dtype", "voxel_size_nm", "kind"})
        if (!hdr.contains(key))
            throw format_error(std::string("VOL1: missing field \"") + key + "\" in " +
                               header_path);

    Shape3 shape{};
    try {
        for (int a = 0; a < 3; ++a) shape[static_cast<std::size_t>(a)] = hdr["shape"].at(a).get<std::int64_t>();
    } catch (const nlohmann::json::exception&) {
        throw format_error("VOL1: shape must be [z,y,x] integers in " + header_path);
    }
    if (shape[0] < 1 || shape[1] < 1 || shape[2] < 1)
        throw format_error("VOL1: shape components must be >= 1 in " + header_path);

    Volume3D vol;
    for (int a = 0; a < 3; ++a) {
        vol.meta.voxel_size_nm[static_cast<std::size_t>(a)] = hdr["voxel_size_nm"].at(a).get<double>();
        if (!(vol.meta.voxel_size_nm[static_cast<std::size_t>(a)] > 0.0))
            throw format_error("VOL1: voxel_size_nm components must be > 0 in " + header_path);
    }
    vol.meta.kind = volume_kind_from_string(hdr["kind"].get<std::string>());

    const std::string dtype = hdr["dtype"].get<std::string>();
    const auto raw = detail::raw_path_for(header_path);
    std::ifstream rin(raw, std::ios::binary);
    if (!rin) throw format_error("VOL1: missing payload " + raw.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(rin)),
                                     std::istreambuf_iterator<char>());

    const std::int64_t n = voxel_count(shape);
    if (dtype == "uint8") {
        if (static_cast<std::int64_t>(bytes.size()) != n)
            throw format_error("VOL1: payload size " + std::to_string(bytes.size()) +
                               " != expected " + std::to_string(n) + " for " + raw.string());
        std::vector<std::uint8_t> data(bytes.begin(), bytes.end());
        vol.grid = Grid3<std::uint8_t>(shape, std::move(data));
    } else if (dtype == "float32") {
        if (static_cast<std::int64_t>(bytes.size()) != n * 4)
            throw format_error("VOL1: payload size " + std::to_string(bytes.size()) +
                               " != expected " + std::to_string(n * 4) + " for " + raw.string());
        std::vector<float> data(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i)
            data[static_cast<std::size_t>(i)] =
                std::bit_cast<float>(detail::read_le32(&bytes[static_cast<std::size_t>(i) * 4]));
        if (vol.meta.kind == VolumeKind::prob)
            for (float f : data)
                if (!(f >= 0.0f && f <= 1.0f))
                    throw format_error("VOL1: prob volume has value outside [0,1] in " +
                                       raw.string());
        vol.grid = Grid3<float>(shape, std::move(data));
    } else {
        throw format_error("VOL1: unknown dtype \"" + dtype + "\" in " + header_path);
    }
    return vol;
}

// ---------------------------------------------------------------------------
// Points CSV: header `id,z,y,x[,score]`, UTF-8, LF endings. The channel is
// carried by the caller (file role), not the file.
// ---------------------------------------------------------------------------

inline void write_points(const PointSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("cannot write points CSV: " + path);
    out << (set.has_scores ? "id,z,y,x,score\n" : "id,z,y,x\n");
    for (const auto& p : set.points) {
        out << p.id << ',' << detail::shortest_double(p.z) << ','
            << detail::shortest_double(p.y) << ',' << detail::shortest_double(p.x);
        if (set.has_scores) out << ',' << detail::shortest_double(static_cast<double>(p.score));
        out << '\n';
    }
    if (!out) throw format_error("short write of points CSV: " + path);
}

inline PointSet read_points(const std::string& path, Channel channel) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open points CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw format_error("points CSV is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool has_scores;
    if (line == "id,z,y,x")
        has_scores = false;
    else if (line == "id,z,y,x,score")
        has_scores = true;
    else
        throw format_error("points CSV: bad header \"" + line + "\" in " + path);

    PointSet set;
    set.channel = channel;
    set.has_scores = has_scores;
    std::unordered_set<std::int64_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        const std::size_t expected = has_scores ? 5 : 4;
        if (fields.size() != expected)
            throw format_error("points CSV: line " + std::to_string(lineno) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(expected) + " in " + path);
        Point p;
        auto parse_i64 = [&](const std::string& s) {
            std::int64_t v = 0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw format_error("points CSV: non-integer id \"" + s + "\" at line " +
                                   std::to_string(lineno) + " in " + path);
            return v;
        };
        auto parse_f64 = [&](const std::string& s) {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw format_error("points CSV: non-numeric coordinate \"" + s +
                                   "\" at line " + std::to_string(lineno) + " in " + path);
            return v;
        };
        p.id = parse_i64(fields[0]);
        p.z = parse_f64(fields[1]);
        p.y = parse_f64(fields[2]);
        p.x = parse_f64(fields[3]);
        if (has_scores) p.score = static_cast<float>(parse_f64(fields[4]));
        if (!seen.insert(p.id).second)
            throw format_error("points CSV: duplicate id " + std::to_string(p.id) + " in " +
                               path);
        set.points.push_back(p);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Pairs JSON: {"pairs":[{"pre_id":..,"post_id":..,"distance_voxels":..}, ...]}
// ---------------------------------------------------------------------------

inline void write_pairs(const SynapsePairSet& pairs, const std::string& path) {
    nlohmann::ordered_json j;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs.pairs) {
        nlohmann::ordered_json e;
        e["pre_id"] = p.pre_id;
        e["post_id"] = p.post_id;
        e["distance_voxels"] = p.distance_voxels;
        j["pairs"].push_back(e);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("cannot write pairs JSON: " + path);
    out << j.dump(2) << "\n";
}

inline SynapsePairSet read_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open pairs JSON: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw format_error("invalid pairs JSON " + path + ": " + e.what());
    }
    if (!j.contains("pairs") || !j["pairs"].is_array())
        throw format_error("pairs JSON: missing \"pairs\" array in " + path);
    SynapsePairSet set;
    for (const auto& e : j["pairs"]) {
        SynapsePair p;
        try {
            p.pre_id = e.at("pre_id").get<std::int64_t>();
            p.post_id = e.at("post_id").get<std::int64_t>();
            p.distance_voxels = e.at("distance_voxels").get<double>();
        } catch (const nlohmann::json::exception& ex) {
            throw format_error("pairs JSON: bad pair entry in " + path + ": " + ex.what());
        }
        set.pairs.push_back(p);
    }
    set.validate_unique_posts();
    return set;
}

} // namespace voxsyn
