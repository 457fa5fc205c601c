#include "maskdiff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "maskdiff/errors.hpp"

namespace maskdiff {

Val Tape::push(double val, int32_t a, double da, int32_t b, double db, int32_t param) {
    nodes_.push_back(Node{val, a, b, da, db, param});
    return Val{static_cast<int32_t>(nodes_.size()) - 1};
}

Val Tape::constant(double v) {
    return push(v, -1, 0.0, -1, 0.0);
}

Val Tape::param(int param_index, double v) {
    return push(v, -1, 0.0, -1, 0.0, param_index);
}

Val Tape::add(Val a, Val b) {
    return push(nodes_[a.i].val + nodes_[b.i].val, a.i, 1.0, b.i, 1.0);
}

Val Tape::sub(Val a, Val b) {
    return push(nodes_[a.i].val - nodes_[b.i].val, a.i, 1.0, b.i, -1.0);
}

Val Tape::mul(Val a, Val b) {
    const double va = nodes_[a.i].val;
    const double vb = nodes_[b.i].val;
    return push(va * vb, a.i, vb, b.i, va);
}

Val Tape::div(Val a, Val b) {
    const double va = nodes_[a.i].val;
    const double vb = nodes_[b.i].val;
    return push(va / vb, a.i, 1.0 / vb, b.i, -va / (vb * vb));
}

Val Tape::neg(Val a) {
    return push(-nodes_[a.i].val, a.i, -1.0, -1, 0.0);
}

Val Tape::log(Val a) {
    const double va = nodes_[a.i].val;
    return push(std::log(va), a.i, 1.0 / va, -1, 0.0);
}

Val Tape::exp(Val a) {
    const double e = std::exp(nodes_[a.i].val);
    return push(e, a.i, e, -1, 0.0);
}

Val Tape::tanh(Val a) {
    const double t = std::tanh(nodes_[a.i].val);
    return push(t, a.i, 1.0 - t * t, -1, 0.0);
}

Val Tape::scale(Val a, double c) {
    return push(c * nodes_[a.i].val, a.i, c, -1, 0.0);
}

Val Tape::shift(Val a, double c) {
    return push(nodes_[a.i].val + c, a.i, 1.0, -1, 0.0);
}

Val Tape::sum(std::span<const Val> xs) {
    if (xs.empty()) {
        return constant(0.0);
    }
    Val acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) {
        acc = add(acc, xs[i]);
    }
    return acc;
}

Val Tape::logsumexp(std::span<const Val> xs) {
    if (xs.empty()) {
        throw validation_error("Tape::logsumexp: empty input");
    }
    double m = nodes_[xs[0].i].val;
    for (const Val v : xs) {
        m = std::max(m, nodes_[v.i].val);
    }
    // the shift is a constant w.r.t. the tape, the identity stays exact
    Val acc = exp(shift(xs[0], -m));
    for (size_t i = 1; i < xs.size(); ++i) {
        acc = add(acc, exp(shift(xs[i], -m)));
    }
    return shift(log(acc), m);
}

double Tape::value(Val v) const {
    return nodes_[v.i].val;
}

void Tape::backward(Val loss, std::vector<double> & grad) {
    if (nodes_.empty() || !loss.valid() || loss.i >= static_cast<int32_t>(nodes_.size())) {
        throw validation_error("Tape::backward: no recorded computation for this loss");
    }
    adjoint_.assign(nodes_.size(), 0.0);
    adjoint_[static_cast<size_t>(loss.i)] = 1.0;
    for (int32_t i = loss.i; i >= 0; --i) {
        const double g = adjoint_[static_cast<size_t>(i)];
        if (g == 0.0) {
            continue;
        }
        const Node & n = nodes_[static_cast<size_t>(i)];
        if (n.a >= 0) {
            adjoint_[static_cast<size_t>(n.a)] += n.da * g;
        }
        if (n.b >= 0) {
            adjoint_[static_cast<size_t>(n.b)] += n.db * g;
        }
        if (n.param >= 0) {
            if (static_cast<size_t>(n.param) >= grad.size()) {
                throw validation_error("Tape::backward: gradient buffer smaller than parameter index");
            }
            grad[static_cast<size_t>(n.param)] += g;
        }
    }
}

void Tape::clear() {
    nodes_.clear();
    adjoint_.clear();
}

}  // namespace maskdiff
