#include <registra/serialize.hpp>
#include <registra/error.hpp>

#include <algorithm>
#include <cmath>

namespace registra::json_io {

namespace {

const Json* find(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::string child(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

template <typename E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<Polarity> kPolarities[] = {
    {Polarity::DarkToLight, "dark_to_light"}, {Polarity::LightToDark, "light_to_dark"}, {Polarity::Any, "any"}};
constexpr EnumName<Smoothing> kSmoothings[] = {{Smoothing::None, "none"}, {Smoothing::Binomial3, "binomial3"}};
constexpr EnumName<BlobPolarity> kBlobPolarities[] = {{BlobPolarity::Bright, "bright"}, {BlobPolarity::Dark, "dark"}};

template <typename E, std::size_t N>
const char* enum_name(const EnumName<E> (&table)[N], E v) {
    for (const auto& e : table) {
        if (e.value == v) return e.name;
    }
    return table[0].name;
}

template <typename E, std::size_t N>
E enum_value(const EnumName<E> (&table)[N], const std::string& s, const std::string& path) {
    for (const auto& e : table) {
        if (s == e.name) return e.value;
    }
    std::string allowed;
    for (const auto& e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
    schema_error(path, "'" + s + "' is not one of: " + allowed);
}

}  // namespace

void schema_error(const std::string& path, const std::string& reason) {
    throw Error(ErrorCode::SchemaError, (path.empty() ? std::string("<root>") : path) + ": " + reason);
}

void expect_object(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) schema_error(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            schema_error(child(path, it.key().c_str()), "unknown field");
        }
    }
}

double get_number(const Json& obj, const char* key, const std::string& path, std::optional<double> fallback) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        schema_error(child(path, key), "required number missing");
    }
    if (!v->is_number()) schema_error(child(path, key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) schema_error(child(path, key), "number must be finite");
    return d;
}

int get_int(const Json& obj, const char* key, const std::string& path, std::optional<int> fallback) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        schema_error(child(path, key), "required integer missing");
    }
    if (!v->is_number_integer()) schema_error(child(path, key), "expected an integer");
    return v->get<int>();
}

bool get_bool(const Json& obj, const char* key, const std::string& path, std::optional<bool> fallback) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        schema_error(child(path, key), "required boolean missing");
    }
    if (!v->is_boolean()) schema_error(child(path, key), "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const Json& obj, const char* key, const std::string& path, std::optional<std::string> fallback) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        schema_error(child(path, key), "required string missing");
    }
    if (!v->is_string()) schema_error(child(path, key), "expected a string");
    return v->get<std::string>();
}

Json to_json(Point2 p) { return Json::array({p.x, p.y}); }

Point2 point_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        schema_error(path, "expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json to_json(const Roi& roi) {
    return Json{{"origin", to_json(roi.origin)},
                {"width", roi.width},
                {"height", roi.height},
                {"theta_deg", roi.theta_deg}};
}

Roi roi_from_json(const Json& j, const std::string& path) {
    expect_object(j, path, {"origin", "width", "height", "theta_deg"});
    if (!j.contains("origin")) schema_error(child(path, "origin"), "required [x, y] missing");
    const Point2 origin = point_from_json(j["origin"], child(path, "origin"));
    const double w = get_number(j, "width", path);
    const double h = get_number(j, "height", path);
    const double theta = get_number(j, "theta_deg", path, 0.0);
    if (!(w > 0.0) || !(h > 0.0)) schema_error(path, "width and height must be > 0");
    return make_roi(origin, w, h, theta);
}

Json to_json(const Transform& t) {
    Json arr = Json::array();
    for (double v : t.matrix()) arr.push_back(v);
    return arr;
}

Transform transform_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 16) schema_error(path, "expected 16-element row-major array");
    std::array<double, 16> m{};
    for (std::size_t i = 0; i < 16; ++i) {
        if (!j[i].is_number()) schema_error(path + "[" + std::to_string(i) + "]", "expected a number");
        m[i] = j[i].get<double>();
    }
    if (!is_similarity(m)) schema_error(path, "matrix is not a planar similarity");
    return Transform::from_matrix(m);
}

Json to_json(const Similarity& s) {
    return Json{{"tx", s.tx}, {"ty", s.ty}, {"theta_deg", s.theta_deg}, {"scale", s.scale}};
}

Json to_json(const SearchParams& p) {
    return Json{{"theta_range_deg", p.theta_range_deg}, {"theta_step_deg", p.theta_step_deg},
                {"theta_fine_step_deg", p.theta_fine_step_deg}, {"scale_min", p.scale_min},
                {"scale_max", p.scale_max}, {"scale_step", p.scale_step},
                {"scale_fine_step", p.scale_fine_step}, {"pyramid_levels", p.pyramid_levels},
                {"min_score", p.min_score}};
}

SearchParams search_params_from_json(const Json& j, const std::string& path) {
    expect_object(j, path,
                  {"theta_range_deg", "theta_step_deg", "theta_fine_step_deg", "scale_min", "scale_max",
                   "scale_step", "scale_fine_step", "pyramid_levels", "min_score"});
    const SearchParams d;
    SearchParams p;
    p.theta_range_deg = get_number(j, "theta_range_deg", path, d.theta_range_deg);
    p.theta_step_deg = get_number(j, "theta_step_deg", path, d.theta_step_deg);
    p.theta_fine_step_deg = get_number(j, "theta_fine_step_deg", path, d.theta_fine_step_deg);
    p.scale_min = get_number(j, "scale_min", path, d.scale_min);
    p.scale_max = get_number(j, "scale_max", path, d.scale_max);
    p.scale_step = get_number(j, "scale_step", path, d.scale_step);
    p.scale_fine_step = get_number(j, "scale_fine_step", path, d.scale_fine_step);
    p.pyramid_levels = get_int(j, "pyramid_levels", path, d.pyramid_levels);
    p.min_score = get_number(j, "min_score", path, d.min_score);
    try {
        validate(p);
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
    return p;
}

Json to_json(const EdgeParams& p) {
    return Json{{"polarity", enum_name(kPolarities, p.polarity)},
                {"min_contrast", p.min_contrast},
                {"num_scanlines", p.num_scanlines},
                {"smoothing", enum_name(kSmoothings, p.smoothing)}};
}

EdgeParams edge_params_from_json(const Json& j, const std::string& path) {
    expect_object(j, path, {"polarity", "min_contrast", "num_scanlines", "smoothing"});
    const EdgeParams d;
    EdgeParams p;
    p.polarity = enum_value(kPolarities, get_string(j, "polarity", path, enum_name(kPolarities, d.polarity)),
                            child(path, "polarity"));
    p.min_contrast = get_number(j, "min_contrast", path, d.min_contrast);
    p.num_scanlines = get_int(j, "num_scanlines", path, d.num_scanlines);
    p.smoothing = enum_value(kSmoothings, get_string(j, "smoothing", path, enum_name(kSmoothings, d.smoothing)),
                             child(path, "smoothing"));
    try {
        validate(p);
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
    return p;
}

Json to_json(const BlobParams& p) {
    return Json{{"threshold", p.threshold},
                {"polarity", enum_name(kBlobPolarities, p.polarity)},
                {"exclude_border", p.exclude_border}};
}

BlobParams blob_params_from_json(const Json& j, const std::string& path) {
    expect_object(j, path, {"threshold", "polarity", "exclude_border"});
    const BlobParams d;
    BlobParams p;
    p.threshold = get_number(j, "threshold", path, d.threshold);
    p.polarity = enum_value(kBlobPolarities,
                            get_string(j, "polarity", path, enum_name(kBlobPolarities, d.polarity)),
                            child(path, "polarity"));
    p.exclude_border = get_bool(j, "exclude_border", path, d.exclude_border);
    try {
        validate(p);
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
    return p;
}

Json annotations_to_json(std::span<const Annotation> annotations) {
    Json out = Json::array();
    for (const Annotation& a : annotations) {
        Json item{{"block", a.block}, {"style", std::string(to_string(a.style))}};
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, SegmentShape>) {
                    item["shape"] = "segment";
                    item["points"] = Json::array({to_json(s.p0), to_json(s.p1)});
                } else if constexpr (std::is_same_v<S, MarkerShape>) {
                    item["shape"] = "marker";
                    item["points"] = Json::array({to_json(s.p)});
                } else if constexpr (std::is_same_v<S, PolylineShape>) {
                    item["shape"] = "polyline";
                    item["points"] = Json::array();
                    for (const Point2& p : s.points) item["points"].push_back(to_json(p));
                } else if constexpr (std::is_same_v<S, MappedRoiOutline>) {
                    item["shape"] = "roi_outline";
                    item["points"] = Json::array();
                    for (const Point2& p : s.corners) item["points"].push_back(to_json(p));
                } else {
                    item["shape"] = "label";
                    item["text"] = s.text;
                    item["points"] = Json::array({to_json(s.anchor)});
                }
            },
            map_annotation(a));
        out.push_back(std::move(item));
    }
    return out;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_text(std::string_view text, const std::string& path) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        schema_error(path, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace registra::json_io
