#include "rationmem/numeric.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rationmem {

Mat64 Mat64::identity(std::size_t n) {
    Mat64 m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

void ParamStore::add(std::string name, Vec64 v) {
    if (index_.count(name)) {
        throw std::invalid_argument("ParamStore: duplicate slot name '" + name + "'");
    }
    index_[name] = slots_.size();
    slots_.push_back(Slot{std::move(name), Tensor{std::move(v)}});
}

void ParamStore::add(std::string name, Mat64 m) {
    if (index_.count(name)) {
        throw std::invalid_argument("ParamStore: duplicate slot name '" + name + "'");
    }
    index_[name] = slots_.size();
    slots_.push_back(Slot{std::move(name), Tensor{std::move(m)}});
}

bool ParamStore::has(std::string_view name) const {
    return index_.count(std::string(name)) != 0;
}

const Tensor& ParamStore::tensor(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        throw std::invalid_argument("ParamStore: no slot named '" + std::string(name) + "'");
    }
    return slots_[it->second].value;
}

Tensor& ParamStore::tensor(std::string_view name) {
    return const_cast<Tensor&>(static_cast<const ParamStore*>(this)->tensor(name));
}

Vec64& ParamStore::vec(std::string_view name) { return std::get<Vec64>(tensor(name)); }
const Vec64& ParamStore::vec(std::string_view name) const { return std::get<Vec64>(tensor(name)); }
Mat64& ParamStore::mat(std::string_view name) { return std::get<Mat64>(tensor(name)); }
const Mat64& ParamStore::mat(std::string_view name) const { return std::get<Mat64>(tensor(name)); }

std::size_t ParamStore::size_at(std::size_t i) const {
    const Tensor& t = slots_[i].value;
    if (const Vec64* v = std::get_if<Vec64>(&t)) return v->dim();
    return std::get<Mat64>(t).values.size();
}

double* ParamStore::data_at(std::size_t i) {
    Tensor& t = slots_[i].value;
    if (Vec64* v = std::get_if<Vec64>(&t)) return v->data();
    return std::get<Mat64>(t).values.data();
}

const double* ParamStore::data_at(std::size_t i) const {
    const Tensor& t = slots_[i].value;
    if (const Vec64* v = std::get_if<Vec64>(&t)) return v->data();
    return std::get<Mat64>(t).values.data();
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) n += size_at(i);
    return n;
}

ParamStore ParamStore::zeros_like() const {
    ParamStore out;
    for (const Slot& s : slots_) {
        if (const Vec64* v = std::get_if<Vec64>(&s.value)) {
            out.add(s.name, Vec64(v->dim(), 0.0));
        } else {
            const Mat64& m = std::get<Mat64>(s.value);
            out.add(s.name, Mat64(m.rows, m.cols, 0.0));
        }
    }
    return out;
}

bool ParamStore::same_shape(const ParamStore& other) const {
    if (slots_.size() != other.slots_.size()) return false;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].name != other.slots_[i].name) return false;
        if (slots_[i].value.index() != other.slots_[i].value.index()) return false;
        if (size_at(i) != other.size_at(i)) return false;
    }
    return true;
}

void ParamStore::add_scaled(const ParamStore& other, double scale) {
    if (!same_shape(other)) {
        throw std::invalid_argument("ParamStore::add_scaled: shape mismatch");
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        double* dst = data_at(i);
        const double* src = other.data_at(i);
        const std::size_t n = size_at(i);
        for (std::size_t k = 0; k < n; ++k) dst[k] += scale * src[k];
    }
}

void ParamStore::fill(double value) {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        double* dst = data_at(i);
        const std::size_t n = size_at(i);
        for (std::size_t k = 0; k < n; ++k) dst[k] = value;
    }
}

bool ParamStore::operator==(const ParamStore& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        const double* a = data_at(i);
        const double* b = other.data_at(i);
        const std::size_t n = size_at(i);
        for (std::size_t k = 0; k < n; ++k) {
            if (a[k] != b[k]) return false;
        }
    }
    return true;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double dot(const Vec64& a, const Vec64& b) {
    if (a.dim() != b.dim()) {
        std::ostringstream msg;
        msg << "dot: dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
        throw std::invalid_argument(msg.str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
    return acc;
}

bool all_finite(const Vec64& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const Mat64& m) {
    for (double x : m.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const ParamStore& p) {
    for (std::size_t i = 0; i < p.slot_count(); ++i) {
        const double* d = p.data_at(i);
        for (std::size_t k = 0; k < p.size_at(i); ++k) {
            if (!std::isfinite(d[k])) return false;
        }
    }
    return true;
}

ParamStore finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                            const ParamStore& params, double eps) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("finite_diff_grad: eps must be > 0");
    }
    ParamStore work = params;
    ParamStore grads = params.zeros_like();
    for (std::size_t i = 0; i < work.slot_count(); ++i) {
        double* p = work.data_at(i);
        double* g = grads.data_at(i);
        const std::size_t n = work.size_at(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double saved = p[k];
            p[k] = saved + eps;
            const double fp = f(work);
            p[k] = saved - eps;
            const double fm = f(work);
            p[k] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                std::ostringstream msg;
                msg << "finite_diff_grad: non-finite objective while perturbing "
                    << work.name_at(i) << "[" << k << "]";
                throw std::runtime_error(msg.str());
            }
            g[k] = (fp - fm) / (2.0 * eps);
        }
    }
    return grads;
}

}  // namespace rationmem
