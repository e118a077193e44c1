#include "gridkcf/io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "gridkcf/errors.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gridkcf {

static_assert(std::endian::native == std::endian::little,
              "frame containers are little-endian; byte swapping not implemented");
static_assert(std::numeric_limits<float>::is_iec559, "need IEEE-754 floats");

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    in.seekg(0, std::ios::end);
    auto len = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<unsigned char> buf(len);
    if (len > 0) in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len));
    if (!in) throw DataError("read failed on " + path);
    return buf;
}

void write_file(const std::string& path, const void* data, std::size_t len) {
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw DataError("write failed on " + path);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& buf, std::uint16_t v) {
    buf.push_back(static_cast<unsigned char>(v & 0xff));
    buf.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void check_payload(const ChannelStack& stack, const char* what) {
    if (stack.width() <= 0 || stack.height() <= 0 || stack.channels() <= 0)
        throw ContractError(std::string(what) + ": empty stack");
    if (!stack.all_finite())
        throw ContractError(std::string(what) + ": non-finite sample values");
}

// Shared plane payload reader. header_len is where the f32 data starts.
ChannelStack read_planes(const std::vector<unsigned char>& buf, std::size_t header_len,
                         std::uint32_t w, std::uint32_t h, std::uint32_t c,
                         const std::string& path) {
    if (w == 0 || h == 0 || c == 0)
        throw DataError(path + ": zero dimension (width=" + std::to_string(w) +
                        " height=" + std::to_string(h) + " channels=" + std::to_string(c) + ")");
    const std::size_t count = static_cast<std::size_t>(w) * h * c;
    const std::size_t need = header_len + count * 4;
    if (buf.size() != need)
        throw DataError(path + ": payload size mismatch, expected " + std::to_string(need) +
                        " bytes, file has " + std::to_string(buf.size()));
    ChannelStack stack(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    std::memcpy(stack.data().data(), buf.data() + header_len, count * 4);
    return stack;
}

} // namespace

// ---- HSIF ---------------------------------------------------------------------

ChannelStack load_hsif(const std::string& path) {
    auto buf = read_file(path);
    constexpr std::size_t header = 19;
    if (buf.size() < header)
        throw DataError(path + ": truncated header, need " + std::to_string(header) +
                        " bytes, have " + std::to_string(buf.size()));
    if (std::memcmp(buf.data(), "HSIF", 4) != 0)
        throw DataError(path + ": bad magic at offset 0, expected 'HSIF'");
    const std::uint16_t version = get_u16(buf.data() + 4);
    if (version != 1)
        throw DataError(path + ": unsupported HSIF version " + std::to_string(version));
    const std::uint32_t w = get_u32(buf.data() + 6);
    const std::uint32_t h = get_u32(buf.data() + 10);
    const std::uint32_t c = get_u32(buf.data() + 14);
    const unsigned dtype = buf[18];
    if (dtype != 0)
        throw DataError(path + ": unsupported dtype " + std::to_string(dtype) + " (only f32)");
    return read_planes(buf, header, w, h, c, path);
}

void save_hsif(const ChannelStack& stack, const std::string& path) {
    check_payload(stack, "save_hsif");
    std::vector<unsigned char> buf;
    buf.reserve(19 + stack.size() * 4);
    buf.insert(buf.end(), {'H', 'S', 'I', 'F'});
    put_u16(buf, 1);
    put_u32(buf, static_cast<std::uint32_t>(stack.width()));
    put_u32(buf, static_cast<std::uint32_t>(stack.height()));
    put_u32(buf, static_cast<std::uint32_t>(stack.channels()));
    buf.push_back(0); // dtype f32
    const std::size_t off = buf.size();
    buf.resize(off + stack.size() * 4);
    std::memcpy(buf.data() + off, stack.data().data(), stack.size() * 4);
    write_file(path, buf.data(), buf.size());
}

// ---- PGM / PPM ------------------------------------------------------------------

namespace {

// Reads the next header token, skipping whitespace and # comments.
std::string pnm_token(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& path) {
    while (pos < buf.size()) {
        if (std::isspace(buf[pos])) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(buf[pos])) ++pos;
    if (start == pos) throw DataError(path + ": truncated raster header");
    return std::string(buf.begin() + static_cast<std::ptrdiff_t>(start),
                       buf.begin() + static_cast<std::ptrdiff_t>(pos));
}

int pnm_int(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& path) {
    std::string tok = pnm_token(buf, pos, path);
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw DataError(path + ": bad raster header field '" + tok + "'");
    return v;
}

ChannelStack load_pnm(const std::vector<unsigned char>& buf, const std::string& path) {
    std::size_t pos = 0;
    std::string magic = pnm_token(buf, pos, path);
    const int channels = magic == "P5" ? 1 : 3;
    const int w = pnm_int(buf, pos, path);
    const int h = pnm_int(buf, pos, path);
    const int maxval = pnm_int(buf, pos, path);
    if (w <= 0 || h <= 0) throw DataError(path + ": non-positive raster dimensions");
    if (maxval != 255)
        throw DataError(path + ": only 8-bit rasters supported (maxval " + std::to_string(maxval) + ")");
    ++pos; // single whitespace after maxval
    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    if (buf.size() - pos < count)
        throw DataError(path + ": truncated raster payload, expected " + std::to_string(count) +
                        " bytes, have " + std::to_string(buf.size() - pos));
    ChannelStack stack(w, h, channels);
    // interleaved bytes to channel-major floats
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) {
                unsigned char b = buf[pos + (static_cast<std::size_t>(y) * w + x) * channels + c];
                stack.at(x, y, c) = static_cast<float>(b) / 255.0f;
            }
    return stack;
}

unsigned char quantize(float v) {
    float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    return static_cast<unsigned char>(c * 255.0f + 0.5f);
}

} // namespace

ChannelStack load_frame(const std::string& path) {
    auto buf = read_file(path);
    if (buf.size() >= 4 && std::memcmp(buf.data(), "HSIF", 4) == 0)
        return load_hsif(path);
    if (buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '6'))
        return load_pnm(buf, path);
    throw DataError(path + ": unrecognized frame format (magic is neither HSIF nor P5/P6)");
}

void save_pgm(const ChannelStack& single_channel, const std::string& path) {
    check_payload(single_channel, "save_pgm");
    if (single_channel.channels() != 1)
        throw ContractError("save_pgm: expected a single channel, got " +
                            std::to_string(single_channel.channels()));
    std::string header = "P5\n" + std::to_string(single_channel.width()) + " " +
                         std::to_string(single_channel.height()) + "\n255\n";
    std::vector<unsigned char> buf(header.begin(), header.end());
    for (int y = 0; y < single_channel.height(); ++y)
        for (int x = 0; x < single_channel.width(); ++x)
            buf.push_back(quantize(single_channel.at(x, y, 0)));
    write_file(path, buf.data(), buf.size());
}

void save_ppm(const ChannelStack& three_channel, const std::string& path) {
    check_payload(three_channel, "save_ppm");
    if (three_channel.channels() != 3)
        throw ContractError("save_ppm: expected three channels, got " +
                            std::to_string(three_channel.channels()));
    std::string header = "P6\n" + std::to_string(three_channel.width()) + " " +
                         std::to_string(three_channel.height()) + "\n255\n";
    std::vector<unsigned char> buf(header.begin(), header.end());
    for (int y = 0; y < three_channel.height(); ++y)
        for (int x = 0; x < three_channel.width(); ++x)
            for (int c = 0; c < 3; ++c) buf.push_back(quantize(three_channel.at(x, y, c)));
    write_file(path, buf.data(), buf.size());
}

// ---- FMAP ----------------------------------------------------------------------

FeatureMap load_fmap(const std::string& path) {
    auto buf = read_file(path);
    constexpr std::size_t header = 20;
    if (buf.size() < header)
        throw DataError(path + ": truncated header, need " + std::to_string(header) +
                        " bytes, have " + std::to_string(buf.size()));
    if (std::memcmp(buf.data(), "FMAP", 4) != 0)
        throw DataError(path + ": bad magic at offset 0, expected 'FMAP'");
    const std::uint16_t version = get_u16(buf.data() + 4);
    if (version != 1)
        throw DataError(path + ": unsupported FMAP version " + std::to_string(version));
    const std::uint32_t w = get_u32(buf.data() + 6);
    const std::uint32_t h = get_u32(buf.data() + 10);
    const std::uint32_t c = get_u32(buf.data() + 14);
    const std::uint16_t stride = get_u16(buf.data() + 18);
    if (stride == 0) throw DataError(path + ": feature stride must be positive");
    FeatureMap map;
    map.stride = stride;
    map.features = read_planes(buf, header, w, h, c, path);
    return map;
}

void save_fmap(const FeatureMap& map, const std::string& path) {
    check_payload(map.features, "save_fmap");
    if (map.stride <= 0 || map.stride > 0xffff)
        throw ContractError("save_fmap: stride out of range: " + std::to_string(map.stride));
    std::vector<unsigned char> buf;
    buf.reserve(20 + map.features.size() * 4);
    buf.insert(buf.end(), {'F', 'M', 'A', 'P'});
    put_u16(buf, 1);
    put_u32(buf, static_cast<std::uint32_t>(map.features.width()));
    put_u32(buf, static_cast<std::uint32_t>(map.features.height()));
    put_u32(buf, static_cast<std::uint32_t>(map.features.channels()));
    put_u16(buf, static_cast<std::uint16_t>(map.stride));
    const std::size_t off = buf.size();
    buf.resize(off + map.features.size() * 4);
    std::memcpy(buf.data() + off, map.features.data().data(), map.features.size() * 4);
    write_file(path, buf.data(), buf.size());
}

// ---- manifest -------------------------------------------------------------------

SequenceManifest load_manifest(const std::string& path) {
    auto buf = read_file(path);
    ordered_json j;
    try {
        j = ordered_json::parse(buf.begin(), buf.end());
    } catch (const std::exception& e) {
        throw DataError(path + ": manifest is not valid JSON: " + e.what());
    }

    SequenceManifest m;
    m.base_dir = fs::path(path).parent_path().string();
    try {
        m.fps = j.at("fps").get<double>();
        m.channels = j.at("channels").get<int>();
        if (j.contains("wavelengths_nm"))
            m.wavelengths_nm = j["wavelengths_nm"].get<std::vector<double>>();
        if (j.contains("ground_truth"))
            m.ground_truth = j["ground_truth"].get<std::vector<std::string>>();
        for (const auto& jf : j.at("frames")) {
            FrameEntry fe;
            fe.index = jf.at("index").get<int>();
            fe.timestamp = jf.at("time").get<double>();
            fe.path = jf.at("path").get<std::string>();
            if (jf.contains("homography")) {
                auto v = jf["homography"].get<std::vector<double>>();
                if (v.size() != 9)
                    throw DataError(path + ": homography for frame " + std::to_string(fe.index) +
                                    " must have 9 entries");
                Homography hg;
                std::copy(v.begin(), v.end(), hg.m.begin());
                fe.to_canonical = hg;
            }
            m.frames.push_back(std::move(fe));
        }
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(path + ": bad manifest field: " + e.what());
    }

    if (m.fps <= 0.0) throw DataError(path + ": fps must be positive");
    if (m.channels <= 0) throw DataError(path + ": channels must be positive");
    if (m.frames.empty()) throw DataError(path + ": manifest has no frames");
    std::size_t with_h = 0;
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        if (i > 0 && m.frames[i].index <= m.frames[i - 1].index)
            throw DataError(path + ": frame indices must be strictly increasing (entry " +
                            std::to_string(i) + ")");
        if (m.frames[i].to_canonical) ++with_h;
    }
    if (with_h != 0 && with_h != m.frames.size())
        throw DataError(path + ": homographies must be present on all frames or none");
    return m;
}

void save_manifest(const SequenceManifest& manifest, const std::string& path) {
    ordered_json j;
    j["schema"] = "gridkcf-manifest";
    j["version"] = 1;
    j["fps"] = manifest.fps;
    j["channels"] = manifest.channels;
    if (!manifest.wavelengths_nm.empty()) j["wavelengths_nm"] = manifest.wavelengths_nm;
    if (!manifest.ground_truth.empty()) j["ground_truth"] = manifest.ground_truth;
    j["frames"] = ordered_json::array();
    for (const auto& fe : manifest.frames) {
        ordered_json jf;
        jf["index"] = fe.index;
        jf["time"] = fe.timestamp;
        jf["path"] = fe.path;
        if (fe.to_canonical) {
            jf["homography"] = std::vector<double>(fe.to_canonical->m.begin(), fe.to_canonical->m.end());
        }
        j["frames"].push_back(std::move(jf));
    }
    std::string text = j.dump(2);
    text.push_back('\n');
    write_file(path, text.data(), text.size());
}

std::string resolve_path(const SequenceManifest& manifest, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute() || manifest.base_dir.empty()) return rel;
    return (fs::path(manifest.base_dir) / p).string();
}

// ---- CSV -----------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw ContractError("format_double failed");
    return std::string(buf, p);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
        // trim spaces and a trailing \r
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t'))
            field.pop_back();
        std::size_t lead = field.find_first_not_of(" \t");
        out.push_back(lead == std::string::npos ? std::string() : field.substr(lead));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_num(const std::string& field, const std::string& path, int lineno) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        throw DataError(path + ":" + std::to_string(lineno) + ": bad numeric field '" + field + "'");
    return v;
}

bool looks_like_header(const std::string& line) {
    for (char ch : line) {
        if (ch == ' ' || ch == '\t') continue;
        return !(std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '+' || ch == '.');
    }
    return true;
}

std::vector<std::string> read_csv_lines(const std::string& path) {
    auto buf = read_file(path);
    std::vector<std::string> lines;
    std::string cur;
    for (unsigned char ch : buf) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(ch));
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

} // namespace

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path) {
    auto lines = read_csv_lines(path);
    std::vector<GroundTruthEntry> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty() || (i == 0 && looks_like_header(line))) continue;
        auto f = split_csv_line(line);
        if (f.size() != 5 && f.size() != 6)
            throw DataError(path + ":" + std::to_string(i + 1) +
                            ": expected frame,cx,cy,w,h[,occluded], got " + std::to_string(f.size()) +
                            " fields");
        GroundTruthEntry e;
        const int lineno = static_cast<int>(i + 1);
        e.frame = static_cast<int>(parse_num(f[0], path, lineno));
        e.cx = parse_num(f[1], path, lineno);
        e.cy = parse_num(f[2], path, lineno);
        e.w = parse_num(f[3], path, lineno);
        e.h = parse_num(f[4], path, lineno);
        if (f.size() == 6) e.occluded = parse_num(f[5], path, lineno) != 0.0;
        out.push_back(e);
    }
    if (out.empty()) throw DataError(path + ": no ground-truth rows");
    return out;
}

void save_ground_truth(const std::vector<GroundTruthEntry>& entries, const std::string& path) {
    std::string text = "frame,cx,cy,w,h,occluded\n";
    for (const auto& e : entries) {
        text += std::to_string(e.frame) + "," + format_double(e.cx) + "," + format_double(e.cy) +
                "," + format_double(e.w) + "," + format_double(e.h) + "," + (e.occluded ? "1" : "0") +
                "\n";
    }
    write_file(path, text.data(), text.size());
}

std::vector<TrajectoryPoint> load_trajectory(const std::string& path) {
    auto lines = read_csv_lines(path);
    std::vector<TrajectoryPoint> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty() || (i == 0 && looks_like_header(line))) continue;
        auto f = split_csv_line(line);
        if (f.size() != 5)
            throw DataError(path + ":" + std::to_string(i + 1) +
                            ": expected frame,cx,cy,psr,coasting, got " + std::to_string(f.size()) +
                            " fields");
        TrajectoryPoint p;
        const int lineno = static_cast<int>(i + 1);
        p.frame = static_cast<int>(parse_num(f[0], path, lineno));
        p.cx = parse_num(f[1], path, lineno);
        p.cy = parse_num(f[2], path, lineno);
        p.psr = parse_num(f[3], path, lineno);
        p.coasting = parse_num(f[4], path, lineno) != 0.0;
        out.push_back(p);
    }
    if (out.empty()) throw DataError(path + ": no trajectory rows");
    return out;
}

void save_trajectory(const std::vector<TrajectoryPoint>& points, const std::string& path) {
    std::string text = "frame,cx,cy,psr,coasting\n";
    for (const auto& p : points) {
        text += std::to_string(p.frame) + "," + format_double(p.cx) + "," + format_double(p.cy) +
                "," + format_double(p.psr) + "," + (p.coasting ? "1" : "0") + "\n";
    }
    write_file(path, text.data(), text.size());
}

} // namespace gridkcf
