#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maskdiff {

using Token = int32_t;

// Fixed-length token sequence. Entries are clean tokens in 0..V-1 or the
// vocabulary's mask id; a mask entry marks an unresolved position.
using Sequence = std::vector<Token>;

// Token alphabet of V regular tokens plus one reserved MASK symbol. Regular
// tokens are 0..V-1 and the mask id is V itself. No denoiser output ever
// places mass on the mask id.
struct Vocabulary {
    int size = 0;

    explicit Vocabulary(int v);

    Token mask_id() const { return size; }
    bool is_mask(Token t) const { return t == size; }
    bool valid_state_token(Token t) const { return t >= 0 && t <= size; }
    bool valid_clean_token(Token t) const { return t >= 0 && t < size; }
};

// Conditioning attached to dataset records and sampling runs. The synthetic
// tasks here are unconditional, so the payload is usually empty; the id still
// tags records so groups stay within one context.
struct Context {
    std::string id = "default";
    std::vector<double> payload;
};

bool has_mask(const Sequence & x, const Vocabulary & vocab);
int count_masked(const Sequence & x, const Vocabulary & vocab);

// throws validation_error unless every entry is a clean token
void check_clean(const Sequence & x, const Vocabulary & vocab, const char * what);

// throws validation_error unless every entry is a clean token or mask
void check_state(const Sequence & x, const Vocabulary & vocab, const char * what);

// throws validation_error unless xt agrees with x0 on every unmasked position
void check_consistent_pair(const Sequence & x0, const Sequence & xt, const Vocabulary & vocab);

// Mixed-radix codes for enumeration: clean codes run over V^L mask-free
// sequences, state codes over (V+1)^L latent states (mask is digit V).
// Position 0 is the least significant digit.
int clean_code(const Sequence & x, int vocab_size);
Sequence clean_decode(int code, int vocab_size, int length);
int state_code_of(const Sequence & x, int vocab_size);
Sequence state_decode(int code, int vocab_size, int length);

}  // namespace maskdiff
