#include "hyperseg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <png.h>

#include <nlohmann/json.hpp>

#include "hyperseg/errors.hpp"

namespace hyperseg {

namespace {

using nlohmann::json;

void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "' for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("short write to '" + path.string() + "'");
    }
}

} // namespace

void write_hyp1(const std::filesystem::path& path, const HyperCube& cube, Hyp1Dtype dtype) {
    json header{{"width", cube.width()},
                {"height", cube.height()},
                {"channels", cube.channels()},
                {"dtype", dtype == Hyp1Dtype::F32 ? "f32" : "u16"},
                {"byte_order", "little-endian"}};
    if (!cube.channel_labels().empty()) header["channel_labels"] = cube.channel_labels();
    const std::string header_text = header.dump();

    std::string bytes;
    const std::size_t value_size = dtype == Hyp1Dtype::F32 ? 4 : 2;
    bytes.reserve(8 + header_text.size() + cube.data().size() * value_size);
    bytes += "HYP1";
    put_u32le(bytes, static_cast<std::uint32_t>(header_text.size()));
    bytes += header_text;

    for (double v : cube.data()) {
        if (dtype == Hyp1Dtype::F32) {
            put_u32le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            if (v < 0.0 || v > 65535.0 || v != std::floor(v)) {
                throw DataError("write_hyp1: value " + std::to_string(v) +
                                " does not fit dtype u16");
            }
            put_u16le(bytes, static_cast<std::uint16_t>(v));
        }
    }
    write_file(path, bytes);
}

HyperCube read_hyp1(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "HYP1", 4) != 0) {
        throw DataError("'" + path.string() + "': missing HYP1 magic");
    }
    const std::uint32_t header_len = get_u32le(p + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(header_len)) {
        throw DataError("'" + path.string() + "': truncated header");
    }

    json header;
    try {
        header = json::parse(bytes.substr(8, header_len));
    } catch (const json::exception& e) {
        throw DataError("'" + path.string() + "': bad HYP1 header: " + e.what());
    }
    const int width = header.at("width").get<int>();
    const int height = header.at("height").get<int>();
    const int channels = header.at("channels").get<int>();
    const std::string dtype = header.at("dtype").get<std::string>();
    if (dtype != "f32" && dtype != "u16") {
        throw DataError("'" + path.string() + "': unsupported dtype '" + dtype + "'");
    }
    if (width <= 0 || height <= 0 || channels <= 0) {
        throw DataError("'" + path.string() + "': non-positive dimensions in header");
    }

    const std::size_t values =
        static_cast<std::size_t>(width) * height * static_cast<std::size_t>(channels);
    const std::size_t value_size = dtype == "f32" ? 4 : 2;
    const std::size_t expected = values * value_size;
    const std::size_t actual = bytes.size() - 8 - header_len;
    if (actual != expected) {
        throw DataError("'" + path.string() + "': payload is " + std::to_string(actual) +
                        " bytes, expected " + std::to_string(expected));
    }

    HyperCube cube(width, height, channels);
    const unsigned char* payload = p + 8 + header_len;
    for (std::size_t i = 0; i < values; ++i) {
        if (dtype == "f32") {
            cube.data()[i] =
                static_cast<double>(std::bit_cast<float>(get_u32le(payload + 4 * i)));
        } else {
            cube.data()[i] = static_cast<double>(
                static_cast<std::uint16_t>(payload[2 * i] | payload[2 * i + 1] << 8));
        }
    }
    if (header.contains("channel_labels")) {
        cube.set_channel_labels(header["channel_labels"].get<std::vector<std::string>>());
    }
    return cube;
}

void write_hyp1(const std::filesystem::path& path, const ScalarImage& img, Hyp1Dtype dtype) {
    HyperCube cube(img.width(), img.height(), 1);
    for (std::size_t i = 0; i < img.size(); ++i) cube.data()[i] = img.data()[i];
    write_hyp1(path, cube, dtype);
}

ScalarImage read_hyp1_scalar(const std::filesystem::path& path) {
    const HyperCube cube = read_hyp1(path);
    if (cube.channels() != 1) {
        throw DataError("'" + path.string() + "': expected a single channel, found " +
                        std::to_string(cube.channels()));
    }
    ScalarImage img(cube.width(), cube.height());
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = cube.data()[i];
    return img;
}

void write_label_hyp1(const std::filesystem::path& path, const LabelImage& labels) {
    HyperCube cube(labels.width(), labels.height(), 1);
    cube.set_channel_labels({"labels"});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::int32_t v = labels.data()[i];
        if (v < 0 || v > 65535) {
            throw DataError("write_label_hyp1: label " + std::to_string(v) +
                            " does not fit u16");
        }
        cube.data()[i] = static_cast<double>(v);
    }
    write_hyp1(path, cube, Hyp1Dtype::U16);
}

LabelImage read_label_hyp1(const std::filesystem::path& path) {
    const HyperCube cube = read_hyp1(path);
    if (cube.channels() != 1) {
        throw DataError("'" + path.string() + "': label file must have one channel");
    }
    LabelImage labels(cube.width(), cube.height());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double v = cube.data()[i];
        if (v < 0.0 || v != std::floor(v)) {
            throw DataError("'" + path.string() + "': non-integer label value");
        }
        labels.data()[i] = static_cast<std::int32_t>(v);
    }
    return labels;
}

namespace {

std::vector<unsigned char> rescale_to_u8(const ScalarImage& img) {
    const double lo = img.min();
    const double hi = img.max();
    std::vector<unsigned char> out(img.size(), 0);
    if (hi > lo) {
        for (std::size_t i = 0; i < img.size(); ++i) {
            out[i] = static_cast<unsigned char>(
                std::lround((img.data()[i] - lo) / (hi - lo) * 255.0));
        }
    }
    return out;
}

} // namespace

void write_pgm(const std::filesystem::path& path, const ScalarImage& img) {
    const std::vector<unsigned char> pixels = rescale_to_u8(img);
    std::string bytes = "P5\n" + std::to_string(img.width()) + " " +
                        std::to_string(img.height()) + "\n255\n";
    bytes.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_file(path, bytes);
}

ScalarImage read_pgm(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    const auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };

    if (next_token() != "P5") {
        throw DataError("'" + path.string() + "': not a binary PGM (P5)");
    }
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token());
        height = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw DataError("'" + path.string() + "': malformed PGM header");
    }
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw DataError("'" + path.string() + "': bad PGM dimensions");
    }
    ++pos;    // single whitespace after maxval
    const std::size_t values = static_cast<std::size_t>(width) * height;
    const std::size_t value_size = maxval > 255 ? 2 : 1;
    if (bytes.size() - pos < values * value_size) {
        throw DataError("'" + path.string() + "': truncated PGM payload, got " +
                        std::to_string(bytes.size() - pos) + " bytes, expected " +
                        std::to_string(values * value_size));
    }
    ScalarImage img(width, height);
    const auto* payload = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t i = 0; i < values; ++i) {
        // 16-bit PGM samples are big-endian.
        img.data()[i] = value_size == 1
                            ? static_cast<double>(payload[i])
                            : static_cast<double>(payload[2 * i] << 8 | payload[2 * i + 1]);
    }
    return img;
}

namespace {

struct PngReadCtx {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t count) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->pos + count > ctx->size) {
        png_error(png, "read past end of buffer");
    }
    std::memcpy(out, ctx->data + ctx->pos, count);
    ctx->pos += count;
}

void png_vec_write(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), count);
}

void png_noop_flush(png_structp) {}

} // namespace

ScalarImage read_png_gray(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 8 ||
        png_sig_cmp(reinterpret_cast<const unsigned char*>(bytes.data()), 0, 8) != 0) {
        throw DataError("'" + path.string() + "': not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng initialization failed");
    }
    ScalarImage img;
    PngReadCtx ctx{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("'" + path.string() + "': PNG decode error");
    }
    png_set_read_fn(png, &ctx, png_mem_read);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("'" + path.string() + "': only grayscale PNG channels are supported");
    }
    if (depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        depth = 8;
    }
    png_read_update_info(png, info);

    const std::size_t stride = png_get_rowbytes(png, info);
    std::vector<unsigned char> row(stride);
    img = ScalarImage(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < width; ++x) {
            // 16-bit PNG samples are big-endian.
            img(static_cast<int>(x), static_cast<int>(y)) =
                depth == 16 ? static_cast<double>(row[2 * x] << 8 | row[2 * x + 1])
                            : static_cast<double>(row[x]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

namespace {

std::string encode_png(int width, int height, int color_type,
                       const std::vector<unsigned char>& pixels, std::size_t stride) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialization failed");
    }
    std::string bytes;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encode error");
    }
    png_set_write_fn(png, &bytes, png_vec_write, png_noop_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(pixels.data() + y * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return bytes;
}

} // namespace

void write_png_gray(const std::filesystem::path& path, const ScalarImage& img) {
    const std::vector<unsigned char> pixels = rescale_to_u8(img);
    write_file(path, encode_png(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, pixels,
                                static_cast<std::size_t>(img.width())));
}

void label_color(std::int32_t label, unsigned char rgb[3]) {
    if (label <= 0) {
        rgb[0] = rgb[1] = rgb[2] = 0;
        return;
    }
    // Fixed golden-angle palette; labels above 255 reuse entries.
    const int entry = 1 + (label - 1) % 255;
    const double hue = std::fmod(entry * 0.61803398874989485, 1.0);
    const double s = 0.65;
    const double v = 0.95;
    const double c = v * s;
    const double hp = hue * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    const double m = v - c;
    rgb[0] = static_cast<unsigned char>(std::lround((r + m) * 255.0));
    rgb[1] = static_cast<unsigned char>(std::lround((g + m) * 255.0));
    rgb[2] = static_cast<unsigned char>(std::lround((b + m) * 255.0));
}

void write_label_png(const std::filesystem::path& path, const LabelImage& labels) {
    std::vector<unsigned char> pixels(labels.size() * 3);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        label_color(labels.data()[i], pixels.data() + 3 * i);
    }
    write_file(path, encode_png(labels.width(), labels.height(), PNG_COLOR_TYPE_RGB, pixels,
                                static_cast<std::size_t>(labels.width()) * 3));
}

HyperCube read_channel_stack(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("'" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".pgm") files.push_back(entry.path());
    }
    if (files.empty()) {
        throw DataError("'" + dir.string() + "': no .png or .pgm channels found");
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });

    std::vector<ScalarImage> channels;
    std::vector<std::string> labels;
    for (const auto& file : files) {
        channels.push_back(file.extension() == ".pgm" ? read_pgm(file) : read_png_gray(file));
        labels.push_back(file.filename().string());
    }
    HyperCube cube = assemble_channels(channels);
    cube.set_channel_labels(std::move(labels));
    return cube;
}

namespace {

json fca_to_json(const FcaModel& model) {
    json axes = json::array();
    for (int k = 0; k < model.axis_count(); ++k) {
        json row = json::array();
        for (int j = 0; j < model.channel_count; ++j) row.push_back(model.col_coord(k, j));
        axes.push_back(std::move(row));
    }
    return json{{"model", "fca"},
                {"pixel_count", model.pixel_count},
                {"channel_count", model.channel_count},
                {"grand_total", model.grand_total},
                {"row_masses", model.row_masses},
                {"col_masses", model.col_masses},
                {"eigenvalues", model.eigenvalues},
                {"column_coordinates", std::move(axes)},
                {"retained_axes", model.retained_axes}};
}

FcaModel fca_from_json(const json& doc) {
    FcaModel model;
    model.pixel_count = doc.at("pixel_count").get<int>();
    model.channel_count = doc.at("channel_count").get<int>();
    model.grand_total = doc.at("grand_total").get<double>();
    model.row_masses = doc.at("row_masses").get<std::vector<double>>();
    model.col_masses = doc.at("col_masses").get<std::vector<double>>();
    model.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
    model.retained_axes = doc.at("retained_axes").get<int>();
    for (const auto& row : doc.at("column_coordinates")) {
        const auto coords = row.get<std::vector<double>>();
        if (coords.size() != static_cast<std::size_t>(model.channel_count)) {
            throw DataError("fca model: axis length does not match channel count");
        }
        model.col_coords.insert(model.col_coords.end(), coords.begin(), coords.end());
    }
    return model;
}

} // namespace

void save_fca_model(const std::filesystem::path& path, const FcaModel& model) {
    write_file(path, fca_to_json(model).dump(2) + "\n");
}

FcaModel load_fca_model(const std::filesystem::path& path) {
    try {
        const json doc = json::parse(read_file(path));
        if (doc.value("model", "") != "fca") {
            throw DataError("'" + path.string() + "': not an FCA model document");
        }
        return fca_from_json(doc);
    } catch (const json::exception& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

void save_pca_model(const std::filesystem::path& path, const PcaModel& model) {
    json axes = json::array();
    for (int k = 0; k < model.dim; ++k) {
        json row = json::array();
        for (int j = 0; j < model.dim; ++j) row.push_back(model.component(k, j));
        axes.push_back(std::move(row));
    }
    const json doc{{"model", "pca"},
                   {"dim", model.dim},
                   {"means", model.means},
                   {"eigenvalues", model.eigenvalues},
                   {"components", std::move(axes)}};
    write_file(path, doc.dump(2) + "\n");
}

PcaModel load_pca_model(const std::filesystem::path& path) {
    try {
        const json doc = json::parse(read_file(path));
        if (doc.value("model", "") != "pca") {
            throw DataError("'" + path.string() + "': not a PCA model document");
        }
        PcaModel model;
        model.dim = doc.at("dim").get<int>();
        model.means = doc.at("means").get<std::vector<double>>();
        model.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
        for (const auto& row : doc.at("components")) {
            const auto coords = row.get<std::vector<double>>();
            if (coords.size() != static_cast<std::size_t>(model.dim)) {
                throw DataError("pca model: component length does not match dim");
            }
            model.components.insert(model.components.end(), coords.begin(), coords.end());
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

void save_metrics(const std::filesystem::path& path, const SegmentationMetrics& metrics) {
    json classes = json::array();
    for (const ClassScore& c : metrics.classes) {
        classes.push_back({{"truth_label", c.truth_label},
                           {"matched_label", c.matched_label},
                           {"truth_size", c.truth_size},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"f1", c.f1}});
    }
    const json doc{{"micro_f1", metrics.micro_f1},
                   {"macro_f1", metrics.macro_f1},
                   {"classes", std::move(classes)},
                   {"predicted_region_sizes", metrics.predicted_sizes}};
    write_file(path, doc.dump(2) + "\n");
}

} // namespace hyperseg
