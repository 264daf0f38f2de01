#include "loam/sim/schema.hpp"

#include <cmath>

#include "loam/util/errors.hpp"

namespace loam {

double DistSpec::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Constant:
            return a;
        case Kind::UniformInt:
            return static_cast<double>(
                rng.uniform_int(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)));
        case Kind::LogUniform:
            return rng.log_uniform(a, b);
        case Kind::Uniform:
            return rng.uniform(a, b);
    }
    throw ConfigError("DistSpec: unknown kind");
}

std::int64_t DistSpec::sample_int(Rng& rng) const {
    return static_cast<std::int64_t>(std::llround(sample(rng)));
}

const TableInfo& Schema::table(const std::string& id) const {
    for (const auto& t : tables) {
        if (t.table_id == id) return t;
    }
    throw DataError("Schema: unknown table " + id);
}

bool Schema::has_table(const std::string& id) const {
    for (const auto& t : tables) {
        if (t.table_id == id) return true;
    }
    return false;
}

}  // namespace loam
