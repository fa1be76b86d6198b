// Coordinate boxes. Every object in the toolkit lives on a single chart; all
// evaluations outside the box are rejected.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnf/errors.hpp"

namespace pnf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class ChartBox {
public:
    ChartBox() = default;

    ChartBox(std::vector<std::array<double, 2>> bounds, std::string name = "chart")
        : bounds_(std::move(bounds)), name_(std::move(name)) {
        if (bounds_.empty())
            throw ConfigError("chart '" + name_ + "': dimension must be >= 1");
        validate();
    }

    // Cube [-r, r]^n.
    static ChartBox cube(int dim, double r, std::string name = "chart") {
        std::vector<std::array<double, 2>> b(static_cast<std::size_t>(dim), {-r, r});
        return ChartBox(std::move(b), std::move(name));
    }

    // Zero-dimensional parameter domain, used internally when a transversal
    // degenerates to a point (codimension-zero fiber). Not reachable from
    // configuration files, which reject dimension zero at parse time.
    static ChartBox point(std::string name = "point") {
        ChartBox box;
        box.name_ = std::move(name);
        return box;
    }

    int dim() const { return static_cast<int>(bounds_.size()); }
    const std::string& name() const { return name_; }
    const std::vector<std::array<double, 2>>& bounds() const { return bounds_; }

    bool contains(const Vec& x) const {
        if (x.size() != dim()) return false;
        for (int i = 0; i < dim(); ++i) {
            if (!std::isfinite(x[i])) return false;
            if (x[i] < bounds_[static_cast<std::size_t>(i)][0] ||
                x[i] > bounds_[static_cast<std::size_t>(i)][1])
                return false;
        }
        return true;
    }

    void require_inside(const Vec& x) const {
        if (!contains(x)) {
            std::ostringstream os;
            os << "point outside chart '" << name_ << "': [";
            for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
            os << "]";
            throw OutOfDomain(os.str());
        }
    }

    Vec center() const {
        Vec c(dim());
        for (int i = 0; i < dim(); ++i)
            c[i] = 0.5 * (bounds_[static_cast<std::size_t>(i)][0] +
                          bounds_[static_cast<std::size_t>(i)][1]);
        return c;
    }

private:
    void validate() const {
        for (const auto& b : bounds_) {
            if (!std::isfinite(b[0]) || !std::isfinite(b[1]) || b[0] >= b[1]) {
                std::ostringstream os;
                os << "chart '" << name_ << "': invalid bound [" << b[0] << ", " << b[1] << "]";
                throw ConfigError(os.str());
            }
        }
    }

    std::vector<std::array<double, 2>> bounds_;
    std::string name_;
};

} // namespace pnf
