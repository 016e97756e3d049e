#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nbodylab/integrate.hpp"
#include "nbodylab/system.hpp"

namespace nbodylab {

/// Shortest text that keeps 17 significant digits: every double round-trips
/// and identical inputs produce byte-identical files.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Minimal JSON document builder. Objects preserve insertion order so output
/// bytes are stable; doubles go through format_double.
class JsonValue {
public:
    JsonValue() : data_(nullptr) {}
    JsonValue(std::nullptr_t) : data_(nullptr) {}
    JsonValue(bool b) : data_(b) {}
    JsonValue(int i) : data_(static_cast<long long>(i)) {}
    JsonValue(long long i) : data_(i) {}
    JsonValue(std::uint64_t i) : data_(static_cast<long long>(i)) {}
    JsonValue(double x) : data_(x) {}
    JsonValue(const char* s) : data_(std::string(s)) {}
    JsonValue(std::string s) : data_(std::move(s)) {}

    static JsonValue object() {
        JsonValue v;
        v.data_ = Object{};
        return v;
    }
    static JsonValue array() {
        JsonValue v;
        v.data_ = Array{};
        return v;
    }
    static JsonValue array_of(std::span<const double> xs) {
        JsonValue v = array();
        for (double x : xs) v.push_back(JsonValue(x));
        return v;
    }

    JsonValue& set(const std::string& key, JsonValue value) {
        auto& obj = std::get<Object>(data_);
        obj.emplace_back(key, std::make_shared<JsonValue>(std::move(value)));
        return *this;
    }

    JsonValue& push_back(JsonValue value) {
        std::get<Array>(data_).push_back(std::make_shared<JsonValue>(std::move(value)));
        return *this;
    }

    std::string dump() const {
        std::string out;
        write(out);
        return out;
    }

private:
    using Object = std::vector<std::pair<std::string, std::shared_ptr<JsonValue>>>;
    using Array = std::vector<std::shared_ptr<JsonValue>>;

    static void escape_to(std::string& out, const std::string& s) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    void write(std::string& out) const {
        if (std::holds_alternative<std::nullptr_t>(data_)) {
            out += "null";
        } else if (const bool* b = std::get_if<bool>(&data_)) {
            out += *b ? "true" : "false";
        } else if (const long long* i = std::get_if<long long>(&data_)) {
            out += std::to_string(*i);
        } else if (const double* x = std::get_if<double>(&data_)) {
            out += format_double(*x);
        } else if (const std::string* s = std::get_if<std::string>(&data_)) {
            escape_to(out, *s);
        } else if (const Array* a = std::get_if<Array>(&data_)) {
            out += '[';
            for (std::size_t i = 0; i < a->size(); ++i) {
                if (i) out += ',';
                (*a)[i]->write(out);
            }
            out += ']';
        } else {
            const Object& obj = std::get<Object>(data_);
            out += '{';
            for (std::size_t i = 0; i < obj.size(); ++i) {
                if (i) out += ',';
                escape_to(out, obj[i].first);
                out += ':';
                obj[i].second->write(out);
            }
            out += '}';
        }
    }

    std::variant<std::nullptr_t, bool, long long, double, std::string, Object, Array> data_;
};

/// Invariant series as CSV: t, I, E, C1sum, C2sum, Iddot, P_1..P_d,
/// L_1..L_{d(d-1)/2}, r_min, r_max.
inline void write_series_csv(std::ostream& out, const Trajectory& traj, int dim) {
    out << "t,I,E,C1sum,C2sum,Iddot";
    for (int a = 1; a <= dim; ++a) out << ",P_" << a;
    const int n_ang = dim * (dim - 1) / 2;
    for (int a = 1; a <= n_ang; ++a) out << ",L_" << a;
    out << ",r_min,r_max\n";
    for (const InvariantSample& s : traj.samples) {
        out << format_double(s.t) << ',' << format_double(s.inertia) << ',' << format_double(s.energy)
            << ',' << format_double(s.c1) << ',' << format_double(s.c2) << ',' << format_double(s.iddot);
        for (double p : s.momentum) out << ',' << format_double(p);
        for (double l : s.ang_momentum) out << ',' << format_double(l);
        out << ',' << format_double(s.r_min) << ',' << format_double(s.r_max) << '\n';
    }
}

/// n x dim positions (or velocities) as a JSON array of rows.
inline JsonValue matrix_json(std::span<const double> flat, int dim) {
    JsonValue rows = JsonValue::array();
    const int n = static_cast<int>(flat.size()) / dim;
    for (int k = 0; k < n; ++k) {
        rows.push_back(JsonValue::array_of(flat.subspan(static_cast<std::size_t>(k) * dim,
                                                        static_cast<std::size_t>(dim))));
    }
    return rows;
}

}  // namespace nbodylab
