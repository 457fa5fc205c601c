#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace maskdiff {

// Reverse-mode autodiff over scalars. Each node stores its value, up to two
// parents and the local partials computed during the forward pass, so
// backward is one reverse sweep over the tape. Gradients of parameter leaves
// accumulate into a flat buffer aligned with the model's parameter vector.
class Tape {
  public:
    struct Val {
        int32_t i = -1;
        bool valid() const { return i >= 0; }
    };

    Val constant(double v);
    Val param(int param_index, double v);

    Val add(Val a, Val b);
    Val sub(Val a, Val b);
    Val mul(Val a, Val b);
    Val div(Val a, Val b);
    Val neg(Val a);
    Val log(Val a);
    Val exp(Val a);
    Val tanh(Val a);
    Val scale(Val a, double c);
    Val shift(Val a, double c);
    Val sum(std::span<const Val> xs);

    // max-shifted log(sum(exp(x_i))); exact gradient, no overflow
    Val logsumexp(std::span<const Val> xs);

    double value(Val v) const;
    size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    // Accumulates d(loss)/d(param) into grad (indexed by param_index, +=).
    // Throws if the tape holds no recorded computation.
    void backward(Val loss, std::vector<double> & grad);

    void clear();

  private:
    struct Node {
        double val;
        int32_t a, b;      // parent indices, -1 if unused
        double da, db;     // local partials
        int32_t param;     // parameter index for leaves, -1 otherwise
    };

    Val push(double val, int32_t a, double da, int32_t b, double db, int32_t param = -1);

    std::vector<Node> nodes_;
    std::vector<double> adjoint_;
};

using Val = Tape::Val;

}  // namespace maskdiff
