#include "maskdiff/types.hpp"

#include "maskdiff/errors.hpp"

namespace maskdiff {

Vocabulary::Vocabulary(int v) : size(v) {
    if (v < 2) {
        throw validation_error("Vocabulary: need at least 2 regular tokens, got " + std::to_string(v));
    }
}

bool has_mask(const Sequence & x, const Vocabulary & vocab) {
    for (Token t : x) {
        if (vocab.is_mask(t)) {
            return true;
        }
    }
    return false;
}

int count_masked(const Sequence & x, const Vocabulary & vocab) {
    int n = 0;
    for (Token t : x) {
        n += vocab.is_mask(t) ? 1 : 0;
    }
    return n;
}

void check_clean(const Sequence & x, const Vocabulary & vocab, const char * what) {
    for (size_t i = 0; i < x.size(); ++i) {
        if (!vocab.valid_clean_token(x[i])) {
            throw validation_error(std::string(what) + ": position " + std::to_string(i) +
                                   " holds token " + std::to_string(x[i]) +
                                   ", expected a clean token in [0, " + std::to_string(vocab.size) + ")");
        }
    }
}

void check_state(const Sequence & x, const Vocabulary & vocab, const char * what) {
    for (size_t i = 0; i < x.size(); ++i) {
        if (!vocab.valid_state_token(x[i])) {
            throw validation_error(std::string(what) + ": position " + std::to_string(i) +
                                   " holds token " + std::to_string(x[i]) + " outside the vocabulary");
        }
    }
}

int clean_code(const Sequence & x, int vocab_size) {
    int code = 0;
    for (size_t pos = x.size(); pos-- > 0;) {
        code = code * vocab_size + x[pos];
    }
    return code;
}

Sequence clean_decode(int code, int vocab_size, int length) {
    Sequence x(static_cast<size_t>(length));
    for (int pos = 0; pos < length; ++pos) {
        x[static_cast<size_t>(pos)] = code % vocab_size;
        code /= vocab_size;
    }
    return x;
}

int state_code_of(const Sequence & x, int vocab_size) {
    return clean_code(x, vocab_size + 1);
}

Sequence state_decode(int code, int vocab_size, int length) {
    return clean_decode(code, vocab_size + 1, length);
}

void check_consistent_pair(const Sequence & x0, const Sequence & xt, const Vocabulary & vocab) {
    if (x0.size() != xt.size()) {
        throw validation_error("inconsistent pair: lengths differ");
    }
    for (size_t i = 0; i < x0.size(); ++i) {
        if (!vocab.is_mask(xt[i]) && xt[i] != x0[i]) {
            throw validation_error("inconsistent pair: position " + std::to_string(i) +
                                   " is unmasked as " + std::to_string(xt[i]) +
                                   " but the clean sequence holds " + std::to_string(x0[i]));
        }
    }
}

}  // namespace maskdiff
