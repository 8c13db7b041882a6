#pragma once

#include <string>
#include <vector>

#include "visa/actor.hpp"
#include "visa/contrastive.hpp"

namespace visa {

// Everything needed to run a trained policy/critic: structural dims plus the
// three encoders and the policy trunk. Serialized as the magic string
// "VISA1", int64 dimension fields, then all parameters as 64-bit floats in
// declaration order (psi, phi, phi_hat, policy trunk; per net W0, b0, W1,
// b1, ...).
struct Checkpoint {
    int state_dim = 0;
    int action_dim = 0;
    int goal_dim = 0;
    int embed_dim = 0;
    std::vector<int> hidden;
    EncoderSet enc;
    PolicyParams pi;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);

// Throws InputError on bad magic, truncated file, or malformed dims.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace visa
