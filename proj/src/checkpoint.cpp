#include "visa/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "visa/errors.hpp"
#include "visa/rng.hpp"

namespace visa {

namespace {

constexpr char kMagic[5] = {'V', 'I', 'S', 'A', '1'};

void write_i64(std::ostream& os, std::int64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int64_t read_i64(std::istream& is) {
    std::int64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw InputError("checkpoint truncated while reading dimensions");
    return v;
}

void write_params(std::ostream& os, const ParamSet& p) {
    for (const Mat* m : mat_refs(p)) {
        os.write(reinterpret_cast<const char*>(m->a.data()),
                 static_cast<std::streamsize>(m->a.size() * sizeof(double)));
    }
}

void read_params(std::istream& is, ParamSet& p) {
    for (Mat* m : mat_refs(p)) {
        is.read(reinterpret_cast<char*>(m->a.data()),
                static_cast<std::streamsize>(m->a.size() * sizeof(double)));
        if (!is) throw InputError("checkpoint truncated while reading parameters");
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open checkpoint file '" + path + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    write_i64(os, ck.state_dim);
    write_i64(os, ck.action_dim);
    write_i64(os, ck.goal_dim);
    write_i64(os, ck.embed_dim);
    write_i64(os, static_cast<std::int64_t>(ck.hidden.size()));
    for (int h : ck.hidden) write_i64(os, h);
    write_params(os, ck.enc.psi);
    write_params(os, ck.enc.phi);
    write_params(os, ck.enc.phi_hat);
    write_params(os, ck.pi.trunk);
    if (!os) throw InputError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open checkpoint file '" + path + "'");
    char magic[5];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw InputError("'" + path + "' is not a checkpoint (bad magic)");
    }

    Checkpoint ck;
    ck.state_dim = static_cast<int>(read_i64(is));
    ck.action_dim = static_cast<int>(read_i64(is));
    ck.goal_dim = static_cast<int>(read_i64(is));
    ck.embed_dim = static_cast<int>(read_i64(is));
    std::int64_t nh = read_i64(is);
    if (ck.state_dim < 1 || ck.action_dim < 1 || ck.goal_dim < 1 || ck.embed_dim < 1 ||
        nh < 1 || nh > 64) {
        throw InputError("checkpoint '" + path + "' has malformed dimensions");
    }
    for (std::int64_t i = 0; i < nh; ++i) {
        int h = static_cast<int>(read_i64(is));
        if (h < 1) throw InputError("checkpoint '" + path + "' has malformed hidden sizes");
        ck.hidden.push_back(h);
    }

    // Rebuild shapes via init (values are then overwritten from the file).
    Rng scratch(0);
    ck.enc = init_encoders(ck.state_dim, ck.action_dim, ck.embed_dim, ck.hidden, scratch);
    PolicyParams pi = init_policy(ck.state_dim, ck.goal_dim, ck.action_dim, ck.hidden, scratch);
    ck.pi = std::move(pi);

    read_params(is, ck.enc.psi);
    read_params(is, ck.enc.phi);
    read_params(is, ck.enc.phi_hat);
    read_params(is, ck.pi.trunk);

    // The file must end exactly here.
    char extra;
    is.read(&extra, 1);
    if (is.gcount() != 0) throw InputError("checkpoint '" + path + "' has trailing bytes");
    return ck;
}

}  // namespace visa
